//! Ext charts read off minimal resolutions, P-matrices and the algebraic
//! EHP sequence
//!
//! ```text
//! E2^{s-2,t}(S^{2n+1}) -P-> E2^{s,t}(S^n) -E-> E2^{s,t+1}(S^{n+1}) -H-> E2^{s-1,t}(S^{2n+1}) -P-> E2^{s+1,t}(S^n)
//! ```
//!
//! `E2^{s,t}(S^n)` is the number of `J(n)` summands on page `s` of `BG(t)`.
//! The P-matrix `P^s` feeding `S^{n+1}` is the unit part of the δ4 block of
//! `DA(t+1)` from halved `J(n+1)` summands (parents in `BG(t)^{s-1}` of index
//! `2n+1`) to suspended `J(n+1)` summands (from `BG(t)^{s+1}` of index `n`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brown_gitler::BGMorphism;
use crate::gf2::{BitMatrix, BitVec, Echelon};
use crate::resolution::{BGComplex, Provenance, ResolutionError, Tower};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EhpError {
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
    #[error("DA({t}) is not available; the tower reaches t={available}")]
    Missing { t: u32, available: u32 },
    #[error("page {s} of DA({t}) is beyond the computed depth {depth}")]
    Depth { t: u32, s: usize, depth: usize },
    #[error("forbidden unit entry {from}->{to} in DA({t}) at s={s}")]
    ForbiddenBlock { t: u32, s: usize, from: String, to: String },
    #[error("E2^{{{s},{t}}}(S^{n}): chart gives {chart}, P-matrices give {from_p}")]
    DimensionMismatch {
        n: u32,
        s: usize,
        t: u32,
        chart: usize,
        from_p: usize,
    },
    #[error("EHP sequence not exact at {node} for s={s}, t={t}, n={n}")]
    NotExact { n: u32, s: usize, t: u32, node: String },
    #[error("nonzero P-matrix for J({index}) at s={s}, t={t}")]
    NonzeroP { index: u32, s: usize, t: u32 },
    #[error("James splitting fails for S^{n} at s={s}, t={t}: {lhs} != {rhs}")]
    Additivity {
        n: u32,
        s: usize,
        t: u32,
        lhs: usize,
        rhs: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtEntry {
    pub dim: usize,
    pub basis: Vec<String>,
}

/// Nonzero entries of `E2^{s,t}(S^n)`, keyed by `(n, s, t)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtChart {
    entries: BTreeMap<(u32, usize, u32), ExtEntry>,
}

impl ExtChart {
    pub fn new() -> Self {
        ExtChart::default()
    }

    pub fn dim(&self, n: u32, s: usize, t: u32) -> usize {
        self.entries.get(&(n, s, t)).map_or(0, |e| e.dim)
    }

    pub fn get(&self, n: u32, s: usize, t: u32) -> Option<&ExtEntry> {
        self.entries.get(&(n, s, t))
    }

    pub fn insert(&mut self, n: u32, s: usize, t: u32, entry: ExtEntry) {
        if entry.dim > 0 {
            self.entries.insert((n, s, t), entry);
        } else {
            self.entries.remove(&(n, s, t));
        }
    }

    pub fn extend(&mut self, other: ExtChart) {
        self.entries.extend(other.entries);
    }

    /// Nonzero entries in `(n, s, t)` order.
    pub fn iter(&self) -> impl Iterator<Item = ((u32, usize, u32), &ExtEntry)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }

    /// Keeps the entries of one sphere.
    pub fn sphere(&self, n: u32) -> ExtChart {
        ExtChart {
            entries: self
                .entries
                .range((n, 0, 0)..=(n, usize::MAX, u32::MAX))
                .map(|(&k, v)| (k, v.clone()))
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct ChartRecord<'a> {
    n: u32,
    s: usize,
    t: u32,
    dim: usize,
    basis: &'a [String],
}

impl Serialize for ExtChart {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.entries.iter().map(|(&(n, s, t), e)| ChartRecord {
            n,
            s,
            t,
            dim: e.dim,
            basis: &e.basis,
        }))
    }
}

/// The chart slice of a minimal `BG(t)`, pages `0..=s_max`.
pub fn ext_from_bg(bg: &BGComplex, s_max: usize) -> Result<ExtChart, ResolutionError> {
    if let Some(&(s, i, j)) = bg.identity_entries().first() {
        return Err(ResolutionError::NonMinimal {
            t: bg.t(),
            s,
            from: bg.page(s)[i].tag().to_string(),
            to: bg.page(s + 1)[j].tag().to_string(),
        });
    }
    if s_max > bg.s_max() {
        return Err(ResolutionError::Bound {
            t: bg.t(),
            requested: s_max,
            available: bg.s_max(),
        });
    }
    let mut by_key: BTreeMap<(u32, usize), Vec<String>> = BTreeMap::new();
    for s in 0..=s_max {
        for x in bg.page(s) {
            by_key.entry((x.index(), s)).or_default().push(x.tag().to_string());
        }
    }
    let mut chart = ExtChart::new();
    for ((n, s), basis) in by_key {
        chart.insert(n, s, bg.t(), ExtEntry { dim: basis.len(), basis });
    }
    Ok(chart)
}

/// The chart of every `BG(t)` in the tower, pages `0..=s_max`.
pub fn tower_chart(tower: &Tower, s_max: usize) -> Result<ExtChart, ResolutionError> {
    let mut chart = ExtChart::new();
    for t in 1..=tower.t_max() {
        chart.extend(ext_from_bg(tower.bg(t).expect("t in range"), s_max)?);
    }
    Ok(chart)
}

/// Unit coefficients of δ4 between `J(index)` summands of `DA(t+1)`, from
/// page `s` to page `s + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PMatrix {
    pub index: u32,
    pub t: u32,
    pub s: usize,
    /// `BG(t)` tags on page `s - 1` (index `2 * index - 1`).
    pub rows: Vec<String>,
    /// `BG(t)` tags on page `s + 1` (index `index - 1`).
    pub cols: Vec<String>,
    pub matrix: BitMatrix,
}

impl PMatrix {
    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }
}

fn solved_da(tower: &Tower, t: u32) -> Result<&BGComplex, EhpError> {
    tower.da(t + 1).ok_or(EhpError::Missing {
        t: t + 1,
        available: tower.t_max(),
    })
}

/// `P^s` for `J(index)` summands of `DA(t+1)`.
///
/// The other unit blocks among `J(index)` summands of those two pages are
/// checked to vanish.
pub fn p_matrix(tower: &Tower, index: u32, t: u32, s: usize) -> Result<PMatrix, EhpError> {
    let da = solved_da(tower, t)?;
    if s + 1 > da.s_max() {
        return Err(EhpError::Depth {
            t: t + 1,
            s: s + 1,
            depth: da.s_max(),
        });
    }
    let pick = |page: usize, prov: Provenance| -> Vec<usize> {
        da.page(page)
            .iter()
            .enumerate()
            .filter(|(_, x)| x.index() == index && x.prov == prov)
            .map(|(k, _)| k)
            .collect()
    };
    let rows = pick(s, Provenance::B);
    let cols = pick(s + 1, Provenance::A);
    let mut matrix = BitMatrix::zeros(rows.len(), cols.len());
    for (i, j, _) in da.entries(s) {
        let (x, y) = (&da.page(s)[i], &da.page(s + 1)[j]);
        if x.index() != index || y.index() != index || !da.morphism(s, i, j).is_identity() {
            continue;
        }
        match (x.prov, y.prov) {
            (Provenance::B, Provenance::A) => {
                let r = rows.iter().position(|&k| k == i).expect("row listed");
                let c = cols.iter().position(|&k| k == j).expect("column listed");
                matrix.set(r, c, true);
            }
            _ => {
                return Err(EhpError::ForbiddenBlock {
                    t: t + 1,
                    s,
                    from: x.tag().to_string(),
                    to: y.tag().to_string(),
                })
            }
        }
    }
    let strip = |page: usize, ks: &[usize]| -> Vec<String> {
        ks.iter()
            .map(|&k| da.page(page)[k].tag()[1..].to_string())
            .collect()
    };
    Ok(PMatrix {
        index,
        t,
        s,
        rows: strip(s, &rows),
        cols: strip(s + 1, &cols),
        matrix,
    })
}

/// Unit coefficient of a freshly solved δ4 entry, recomputed from the
/// `Sq^m` criterion on the δ1δ1 composite out of the parent.
pub fn p_matrix_by_criterion(tower: &Tower, index: u32, t: u32, s: usize) -> Result<BitMatrix, EhpError> {
    let p = p_matrix(tower, index, t, s)?;
    let da = solved_da(tower, t)?;
    let mut m = BitMatrix::zeros(p.rows.len(), p.cols.len());
    if s == 0 {
        return Ok(m);
    }
    for (r, row_tag) in p.rows.iter().enumerate() {
        let parent = da
            .position(s - 1, &format!("A{row_tag}"))
            .expect("parent of a halved summand");
        let source = da.page(s - 1)[parent].index();
        for (c, col_tag) in p.cols.iter().enumerate() {
            let a = da.position(s + 1, &format!("A{col_tag}")).expect("column summand");
            let mut composite = BGMorphism::zero(source, index);
            for (j, x) in da.page(s).iter().enumerate() {
                if x.prov != Provenance::A {
                    continue;
                }
                let (f, g) = (da.morphism(s - 1, parent, j), da.morphism(s, j, a));
                if f.is_zero() || g.is_zero() {
                    continue;
                }
                let h = crate::brown_gitler::compose(&g, &f).expect("composable");
                let sum = composite.op() + h.op();
                composite = BGMorphism::new(source, index, sum).expect("same endpoints");
            }
            let sq = crate::steenrod::SteenrodMonomial::sq(index);
            m.set(r, c, composite.op().contains(&sq));
        }
    }
    Ok(m)
}

fn coker_projection(p: &BitMatrix) -> BitMatrix {
    let image = Echelon::of_rows(p.num_cols(), p.rows().iter().cloned());
    let free = image.free_columns();
    let mut e = BitMatrix::zeros(p.num_cols(), free.len());
    for i in 0..p.num_cols() {
        let reduced = image.reduce(&BitVec::unit(p.num_cols(), i));
        for (k, &c) in free.iter().enumerate() {
            e.set(i, k, reduced.get(c));
        }
    }
    e
}

/// One cohomological degree of the EHP sequence for `S^n -> S^{n+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EhpRow {
    pub s: usize,
    /// `dim E2^{s,t}(S^n)`.
    pub dim_source: usize,
    /// `dim E2^{s,t+1}(S^{n+1})` from `BG(t+1)`.
    pub dim_middle: usize,
    /// `dim E2^{s-1,t}(S^{2n+1})`.
    pub dim_quotient: usize,
    pub rank_p_prev: usize,
    pub rank_p: usize,
    pub rank_e: usize,
    pub rank_h: usize,
    /// `P^{s-1}: E2^{s-2,t}(S^{2n+1}) -> E2^{s,t}(S^n)`.
    pub p_prev: BitMatrix,
    /// `P^s: E2^{s-1,t}(S^{2n+1}) -> E2^{s+1,t}(S^n)`.
    pub p: BitMatrix,
    /// `E2^{s,t}(S^n) -> coker P^{s-1} ⊕ ker P^s`.
    pub e: BitMatrix,
    /// `coker P^{s-1} ⊕ ker P^s -> E2^{s-1,t}(S^{2n+1})`.
    pub h: BitMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EhpReport {
    pub n: u32,
    pub t: u32,
    pub rows: Vec<EhpRow>,
}

/// Assembles `E`, `H`, `P` for `S^n -> S^{n+1}` at internal degree `t`,
/// checks the middle dimensions against `BG(t+1)` and verifies exactness at
/// the three nodes of every degree `s <= s_max`.
pub fn ehp_assemble(tower: &Tower, n: u32, t: u32, s_max: usize) -> Result<EhpReport, EhpError> {
    let index = n + 1;
    let middle = tower.bg(t + 1).ok_or(EhpError::Missing {
        t: t + 1,
        available: tower.t_max(),
    })?;
    let mut rows = Vec::new();
    for s in 0..=s_max {
        let p_prev = if s == 0 {
            let bg = tower.bg(t).expect("t below t_max");
            BitMatrix::zeros(0, bg.count(n, 0))
        } else {
            p_matrix(tower, index, t, s - 1)?.matrix
        };
        let p = p_matrix(tower, index, t, s)?.matrix;
        let e_coker = coker_projection(&p_prev);
        let kernel = p.left_kernel();
        let coker_dim = e_coker.num_cols();
        let dim_v = coker_dim + kernel.len();
        let mut e = BitMatrix::zeros(p_prev.num_cols(), dim_v);
        e.add_block(0, 0, &e_coker);
        let mut h = BitMatrix::zeros(dim_v, p.num_rows());
        for (k, v) in kernel.iter().enumerate() {
            for c in v.ones() {
                h.set(coker_dim + k, c, true);
            }
        }
        let dim_middle = middle.count(index, s);
        if dim_middle != dim_v {
            return Err(EhpError::DimensionMismatch {
                n: index,
                s,
                t: t + 1,
                chart: dim_middle,
                from_p: dim_v,
            });
        }
        let nodes = [
            ("E2(S^n)", &p_prev, &e),
            ("E2(S^{n+1})", &e, &h),
            ("E2(S^{2n+1})", &h, &p),
        ];
        for (node, f, g) in nodes {
            let exact = f.mul(g).is_zero() && f.rank() + g.rank() == f.num_cols();
            if !exact {
                return Err(EhpError::NotExact {
                    n,
                    s,
                    t,
                    node: node.to_string(),
                });
            }
        }
        rows.push(EhpRow {
            s,
            dim_source: p_prev.num_cols(),
            dim_middle,
            dim_quotient: p.num_rows(),
            rank_p_prev: p_prev.rank(),
            rank_p: p.rank(),
            rank_e: e.rank(),
            rank_h: h.rank(),
            p_prev,
            p,
            e,
            h,
        });
    }
    Ok(EhpReport { n, t, rows })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JamesReport {
    pub k: u32,
    pub t_max: u32,
    pub checked: usize,
}

/// With `n = 2^k`: every P-matrix for `J(n)` vanishes and
/// `dim E2^{s,t+1}(S^n) = dim E2^{s,t}(S^{n-1}) + dim E2^{s-1,t}(S^{2n-1})`
/// for `t <= t_max` (the tower must reach `t_max + 1`) and `s <= s_max`.
pub fn james_splitting_check(tower: &Tower, k: u32, t_max: u32, s_max: usize) -> Result<JamesReport, EhpError> {
    let n = 1u32 << k;
    let mut checked = 0;
    for t in 1..=t_max {
        let lower = tower.bg(t).ok_or(EhpError::Missing {
            t,
            available: tower.t_max(),
        })?;
        let upper = tower.bg(t + 1).ok_or(EhpError::Missing {
            t: t + 1,
            available: tower.t_max(),
        })?;
        for s in 0..=s_max {
            if !p_matrix(tower, n, t, s)?.is_zero() {
                return Err(EhpError::NonzeroP { index: n, s, t });
            }
            let lhs = upper.count(n, s);
            let rhs = lower.count(n - 1, s) + s.checked_sub(1).map_or(0, |r| lower.count(2 * n - 1, r));
            if lhs != rhs {
                return Err(EhpError::Additivity { n, s, t: t + 1, lhs, rhs });
            }
            checked += 1;
        }
    }
    Ok(JamesReport { k, t_max, checked })
}
