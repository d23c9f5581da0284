//! Minimal injective resolutions `BG(t)` of `Σ^t F2` by the doubling step.
//!
//! From `BG(t)` the complex `DA(t+1)` has pages `A^s ⊕ B^s`, where `A^s`
//! suspends page `s` of `BG(t)` (indices +1) and `B^s` halves the even
//! summands of the suspended page `s - 1`. Its differential has four blocks:
//!
//! | block | source -> target  | entries                                   |
//! |-------|-------------------|-------------------------------------------|
//! | δ1    | `A^s -> A^{s+1}`  | suspended differential                    |
//! | δ2    | `B^s -> B^{s+1}`  | halved suspended differential             |
//! | δ3    | `A^s -> B^{s+1}`  | Mahowald surjection onto the own child    |
//! | δ4    | `B^s -> A^{s+1}`  | correction, solved from `∂² = 0`          |
//!
//! Filtering by the page of origin shows that any δ4 with `∂² = 0` gives a
//! resolution; the only possible identity components sit in δ4, and
//! cancelling them by Gaussian chain reduction yields `BG(t+1)`.
//!
//! Truncation: `DA(t+1)` through page `S` needs `BG(t)` through page `S`,
//! and after minimization only pages `< S` are final, so each step loses one
//! page. [`Tower`] starts from `BG(1)` deep enough to compensate.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::brown_gitler::{
    compose_ops, halve_morphism, mahowald_surjection, realize_morphism, realize_slice,
    suspend_morphism, BGMorphism, BGSummand, MorphismError,
};
use crate::gf2::{BitMatrix, SparseSystem};
use crate::steenrod::{admissible_basis_shared, SteenrodElement, SteenrodMonomial};

/// Where a summand of `DA(t+1)` comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    /// Suspension of a summand of `BG(t)^s`.
    A,
    /// Half of a suspended summand of `BG(t)^{s-1}`.
    B,
}

/// The four blocks of the `DA` differential, by provenance of source and
/// target of a composite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Block {
    AA,
    AB,
    BA,
    BB,
}

impl Block {
    fn of(source: Provenance, target: Provenance) -> Block {
        match (source, target) {
            (Provenance::A, Provenance::A) => Block::AA,
            (Provenance::A, Provenance::B) => Block::AB,
            (Provenance::B, Provenance::A) => Block::BA,
            (Provenance::B, Provenance::B) => Block::BB,
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Block::AA => "A->A",
            Block::AB => "A->B",
            Block::BA => "B->A",
            Block::BB => "B->B",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolutionError {
    #[error("input is not minimal: identity component {from}->{to} at (s={s}, t={t})")]
    NonMinimal { t: u32, s: usize, from: String, to: String },
    #[error("page bound {requested} exceeds the {available} pages known for t={t}")]
    Bound { t: u32, requested: usize, available: usize },
    #[error("halving convention violated: A->B composite {from}->{to} nonzero at (s={s}, t={t})")]
    HalvingResidue { t: u32, s: usize, from: String, to: String },
    #[error("correction system inconsistent at (s={s}, t={t}, block {block}) for {from}->{to}")]
    Inconsistent {
        t: u32,
        s: usize,
        block: Block,
        from: String,
        to: String,
    },
    #[error("∂² ≠ 0 at (s={s}, t={t}, block {block:?}) for {from}->{to}")]
    NonzeroSquare {
        t: u32,
        s: usize,
        block: Option<Block>,
        from: String,
        to: String,
    },
    #[error("entry {from}->{to} at (s={s}, t={t}) is not an identity")]
    NotIdentity { t: u32, s: usize, from: String, to: String },
    #[error("identity component {from}->{to} at (s={s}, t={t}) lies outside the correction block")]
    UnexpectedIdentity { t: u32, s: usize, from: String, to: String },
    #[error("identity criterion disagrees with the correction block for {from}->{to} at (s={s}, t={t})")]
    IdentityMismatch { t: u32, s: usize, from: String, to: String },
    #[error("t must be at least 1")]
    BadSphere,
    #[error(transparent)]
    Morphism(#[from] MorphismError),
}

/// A summand on one page, with its provenance in the doubling step.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Summand {
    #[serde(flatten)]
    pub summand: BGSummand,
    pub prov: Provenance,
    /// For `B` summands, the tag of the `A` summand one page earlier in the
    /// doubled complex they were halved from, i.e. `"A"` followed by the tag
    /// of the originating summand of the previous resolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

impl Summand {
    pub fn index(&self) -> u32 {
        self.summand.index
    }

    pub fn tag(&self) -> &str {
        &self.summand.tag
    }
}

/// A cochain complex of finite sums of Brown-Gitler modules.
///
/// Pages `0..=s_max` are stored; `differential[s]` maps page `s` to page
/// `s + 1` and is keyed by summand positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BGComplex {
    t: u32,
    s_max: usize,
    pages: Vec<Vec<Summand>>,
    differential: Vec<BTreeMap<(usize, usize), SteenrodElement>>,
}

impl BGComplex {
    /// An empty complex with pages `0..=s_max`.
    pub fn empty(t: u32, s_max: usize) -> Self {
        BGComplex {
            t,
            s_max,
            pages: vec![Vec::new(); s_max + 1],
            differential: vec![BTreeMap::new(); s_max],
        }
    }

    /// The augmentation index `t` of `Σ^t F2 -> page 0`.
    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn s_max(&self) -> usize {
        self.s_max
    }

    pub fn page(&self, s: usize) -> &[Summand] {
        self.pages.get(s).map_or(&[], Vec::as_slice)
    }

    pub fn pages(&self) -> &[Vec<Summand>] {
        &self.pages
    }

    pub fn position(&self, s: usize, tag: &str) -> Option<usize> {
        self.page(s).iter().position(|x| x.tag() == tag)
    }

    pub fn entry(&self, s: usize, i: usize, j: usize) -> Option<&SteenrodElement> {
        self.differential.get(s).and_then(|d| d.get(&(i, j)))
    }

    /// Nonzero entries of `∂^s` in canonical (source, target) order.
    pub fn entries(&self, s: usize) -> impl Iterator<Item = (usize, usize, &SteenrodElement)> {
        self.differential
            .get(s)
            .into_iter()
            .flat_map(|d| d.iter().map(|(&(i, j), op)| (i, j, op)))
    }

    pub fn morphism(&self, s: usize, i: usize, j: usize) -> BGMorphism {
        let source = self.pages[s][i].index();
        let target = self.pages[s + 1][j].index();
        match self.entry(s, i, j) {
            Some(op) => BGMorphism::new(source, target, op.clone())
                .expect("stored entries are normalized"),
            None => BGMorphism::zero(source, target),
        }
    }

    pub fn num_summands(&self) -> usize {
        self.pages.iter().map(Vec::len).sum()
    }

    /// Number of `J(n)` summands on page `s`.
    pub fn count(&self, n: u32, s: usize) -> usize {
        self.page(s).iter().filter(|x| x.index() == n).count()
    }

    fn set_entry(&mut self, s: usize, i: usize, j: usize, op: SteenrodElement) {
        let target = self.pages[s + 1][j].index();
        let op = op.truncate_excess(target);
        if op.is_zero() {
            self.differential[s].remove(&(i, j));
        } else {
            self.differential[s].insert((i, j), op);
        }
    }

    fn add_to_entry(&mut self, s: usize, i: usize, j: usize, op: &SteenrodElement) {
        if op.is_zero() {
            return;
        }
        let sum = match self.differential[s].get(&(i, j)) {
            Some(old) => old + op,
            None => op.clone(),
        };
        self.set_entry(s, i, j, sum);
    }

    /// Identity components `(s, i, j)` in canonical order.
    pub fn identity_entries(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.differential.len() {
            for (i, j, op) in self.entries(s) {
                if op.is_unit() && self.pages[s][i].index() == self.pages[s + 1][j].index() {
                    out.push((s, i, j));
                }
            }
        }
        out
    }

    pub fn is_minimal(&self) -> bool {
        self.identity_entries().is_empty()
    }

    /// Keeps pages `0..=s_max`.
    pub fn truncate(&self, s_max: usize) -> Result<BGComplex, ResolutionError> {
        if s_max > self.s_max {
            return Err(ResolutionError::Bound {
                t: self.t,
                requested: s_max,
                available: self.s_max,
            });
        }
        Ok(BGComplex {
            t: self.t,
            s_max,
            pages: self.pages[..=s_max].to_vec(),
            differential: self.differential[..s_max].to_vec(),
        })
    }

    /// Renames summands to `"{s}.{k}"` by page and position.
    pub fn relabeled(&self) -> BGComplex {
        let mut out = self.clone();
        for (s, page) in out.pages.iter_mut().enumerate() {
            for (k, x) in page.iter_mut().enumerate() {
                x.summand.tag = format!("{s}.{k}");
            }
        }
        out
    }

    /// All `(s, i, k)` where `Σ_j ∂[j->k] ∘ ∂[i->j]` is nonzero.
    pub fn square_defects(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.differential.len().saturating_sub(1) {
            let mut sums: BTreeMap<(usize, usize), SteenrodElement> = BTreeMap::new();
            for (i, j, first) in self.entries(s) {
                for (j2, k, second) in self.entries(s + 1) {
                    if j2 != j {
                        continue;
                    }
                    let src = self.pages[s][i].index();
                    let dst = self.pages[s + 2][k].index();
                    let c = compose_ops(src, dst, first, second).into_op();
                    if c.is_zero() {
                        continue;
                    }
                    sums.entry((i, k))
                        .and_modify(|acc| *acc += &c)
                        .or_insert(c);
                }
            }
            out.extend(
                sums.into_iter()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|((i, k), _)| (s, i, k)),
            );
        }
        out
    }

    /// `∂² = 0`, reported with coordinates and block of the first failure.
    pub fn check_square_zero(&self) -> Result<(), ResolutionError> {
        match self.square_defects().first() {
            None => Ok(()),
            Some(&(s, i, k)) => {
                let (x, y) = (&self.pages[s][i], &self.pages[s + 2][k]);
                Err(ResolutionError::NonzeroSquare {
                    t: self.t,
                    s,
                    block: Some(Block::of(x.prov, y.prov)),
                    from: x.tag().to_string(),
                    to: y.tag().to_string(),
                })
            }
        }
    }

    /// Dimension of page `s` in internal degree `d`.
    pub fn slice_dim(&self, s: usize, d: u32) -> usize {
        self.page(s).iter().map(|x| realize_slice(x.index(), d).len()).sum()
    }

    /// The realized differential `∂^s` in internal degree `d`.
    pub fn realize_differential(&self, s: usize, d: u32) -> BitMatrix {
        let offsets = |page: &[Summand]| {
            let mut acc = 0;
            page.iter()
                .map(|x| {
                    let o = acc;
                    acc += realize_slice(x.index(), d).len();
                    o
                })
                .collect::<Vec<_>>()
        };
        let src = offsets(self.page(s));
        let dst = offsets(self.page(s + 1));
        let mut m = BitMatrix::zeros(self.slice_dim(s, d), self.slice_dim(s + 1, d));
        for (i, j, _) in self.entries(s) {
            let block = realize_morphism(&self.morphism(s, i, j), d);
            m.add_block(src[i], dst[j], &block);
        }
        m
    }

    /// Homology dimensions `[s][d]` of the realized complex for pages
    /// `0..s_max` (the last stored page has no outgoing differential).
    pub fn realized_homology(&self, d_max: u32) -> Vec<Vec<usize>> {
        let per_degree: Vec<Vec<usize>> = (0..=d_max)
            .into_par_iter()
            .map(|d| {
                let ranks: Vec<usize> = (0..self.s_max)
                    .map(|s| self.realize_differential(s, d).rank())
                    .collect();
                (0..self.s_max)
                    .map(|s| {
                        let incoming = if s == 0 { 0 } else { ranks[s - 1] };
                        self.slice_dim(s, d) - ranks[s] - incoming
                    })
                    .collect()
            })
            .collect();
        (0..self.s_max)
            .map(|s| per_degree.iter().map(|row| row[s]).collect())
            .collect()
    }
}

/// Position on page `s - 1` of the parent of each `B` summand of page `s`.
struct Layout {
    parent: Vec<Vec<Option<usize>>>,
}

impl Layout {
    #[allow(clippy::needless_range_loop)]
    fn of(c: &BGComplex) -> Layout {
        let mut parent: Vec<Vec<Option<usize>>> =
            c.pages.iter().map(|p| vec![None; p.len()]).collect();
        for s in 1..c.pages.len() {
            let by_tag: HashMap<&str, usize> = c.pages[s - 1]
                .iter()
                .enumerate()
                .map(|(i, x)| (x.tag(), i))
                .collect();
            for (k, x) in c.pages[s].iter().enumerate() {
                if x.prov != Provenance::B {
                    continue;
                }
                if let Some(&p) = x.parent.as_deref().and_then(|tag| by_tag.get(tag)) {
                    parent[s][k] = Some(p);
                }
            }
        }
        Layout { parent }
    }
}

/// `BG(1)`: the single summand `J(1)`, since `Σ F2 ≅ ΣJ(0) ≅ J(1)`.
pub fn bg_base(s_max: usize) -> BGComplex {
    let mut c = BGComplex::empty(1, s_max);
    c.pages[0].push(Summand {
        summand: BGSummand {
            index: 1,
            tag: "0.0".to_string(),
        },
        prov: Provenance::A,
        parent: None,
    });
    c
}

fn ensure_minimal(bg: &BGComplex) -> Result<(), ResolutionError> {
    if let Some(&(s, i, j)) = bg.identity_entries().first() {
        return Err(ResolutionError::NonMinimal {
            t: bg.t,
            s,
            from: bg.pages[s][i].tag().to_string(),
            to: bg.pages[s + 1][j].tag().to_string(),
        });
    }
    Ok(())
}

/// `DA(t+1)` through page `s_max`, with the δ4 block left empty.
#[allow(clippy::needless_range_loop)]
pub fn build_da(bg: &BGComplex, s_max: usize) -> Result<BGComplex, ResolutionError> {
    ensure_minimal(bg)?;
    if s_max > bg.s_max {
        return Err(ResolutionError::Bound {
            t: bg.t,
            requested: s_max,
            available: bg.s_max,
        });
    }
    let mut da = BGComplex::empty(bg.t + 1, s_max);
    // b_pos[s][k]: position on DA page s of the B summand born from BG page s-1, summand k
    let mut b_pos: Vec<Vec<Option<usize>>> = vec![Vec::new(); s_max + 1];
    for s in 0..=s_max {
        for x in bg.page(s) {
            da.pages[s].push(Summand {
                summand: BGSummand {
                    index: x.index() + 1,
                    tag: format!("A{}", x.tag()),
                },
                prov: Provenance::A,
                parent: None,
            });
        }
        if s > 0 {
            let mut slots = Vec::new();
            for x in bg.page(s - 1) {
                if (x.index() + 1) % 2 == 0 {
                    slots.push(Some(da.pages[s].len()));
                    da.pages[s].push(Summand {
                        summand: BGSummand {
                            index: x.index().div_ceil(2),
                            tag: format!("B{}", x.tag()),
                        },
                        prov: Provenance::B,
                        parent: Some(format!("A{}", x.tag())),
                    });
                } else {
                    slots.push(None);
                }
            }
            b_pos[s] = slots;
        }
    }
    for s in 0..s_max {
        // δ1
        for (i, j, _) in bg.entries(s) {
            let f = suspend_morphism(&bg.morphism(s, i, j));
            da.set_entry(s, i, j, f.into_op());
        }
        // δ3
        for (k, x) in da.pages[s].clone().iter().enumerate() {
            if x.prov != Provenance::A {
                continue;
            }
            if let Some(Some(child)) = b_pos[s + 1].get(k) {
                let surj = mahowald_surjection(x.index()).expect("even index has a quotient");
                da.set_entry(s, k, *child, surj.into_op());
            }
        }
        // δ2
        if s >= 1 {
            for (i, j, _) in bg.entries(s - 1) {
                let (Some(Some(bi)), Some(Some(bj))) = (b_pos[s].get(i), b_pos[s + 1].get(j)) else {
                    continue;
                };
                let f = halve_morphism(&suspend_morphism(&bg.morphism(s - 1, i, j)))?;
                da.set_entry(s, *bi, *bj, f.into_op());
            }
        }
    }
    Ok(da)
}

/// Variable order for the correction system; the solver returns the
/// lexicographically minimal solution with respect to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VarOrder {
    #[default]
    Canonical,
    Reversed,
}

struct Unknown {
    s: usize,
    b: usize,
    a: usize,
    basis: std::rc::Rc<Vec<SteenrodMonomial>>,
    first_var: usize,
}

/// Fills the δ4 block so that `∂² = 0`, taking the lexicographically
/// minimal solution in canonical variable order.
pub fn solve_delta4(da: &BGComplex) -> Result<BGComplex, ResolutionError> {
    solve_delta4_with(da, VarOrder::Canonical)
}

pub fn solve_delta4_with(da: &BGComplex, order: VarOrder) -> Result<BGComplex, ResolutionError> {
    let s_max = da.s_max;

    let mut unknowns: Vec<Unknown> = Vec::new();
    let mut lookup: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut num_vars = 0;
    for s in 0..s_max {
        for (b, xb) in da.pages[s].iter().enumerate() {
            if xb.prov != Provenance::B {
                continue;
            }
            for (a, xa) in da.pages[s + 1].iter().enumerate() {
                if xa.prov != Provenance::A || xb.index() < xa.index() {
                    continue;
                }
                let basis = admissible_basis_shared(xb.index() - xa.index(), xa.index());
                if basis.is_empty() {
                    continue;
                }
                lookup.insert((s, b, a), unknowns.len());
                let n = basis.len();
                unknowns.push(Unknown {
                    s,
                    b,
                    a,
                    basis,
                    first_var: num_vars,
                });
                num_vars += n;
            }
        }
    }
    let var = |u: &Unknown, k: usize| match order {
        VarOrder::Canonical => u.first_var + k,
        VarOrder::Reversed => num_vars - 1 - (u.first_var + k),
    };

    let mut system = SparseSystem::new(num_vars);
    let mut origin: Vec<(usize, usize, usize)> = Vec::new();
    let outgoing = |s: usize| {
        let mut out: Vec<Vec<(usize, &SteenrodElement)>> = vec![Vec::new(); da.page(s).len()];
        for (i, j, op) in da.entries(s) {
            out[i].push((j, op));
        }
        out
    };

    for s in 0..s_max.saturating_sub(1) {
        let out_s = outgoing(s);
        let out_next = outgoing(s + 1);
        for (xi, x) in da.pages[s].iter().enumerate() {
            for (yi, y) in da.pages[s + 2].iter().enumerate() {
                let mut known = SteenrodElement::zero(x.index().saturating_sub(y.index()));
                let mut coeffs: BTreeMap<SteenrodMonomial, Vec<usize>> = BTreeMap::new();
                if x.index() < y.index() {
                    continue;
                }
                // known ∘ known
                for &(m, first) in &out_s[xi] {
                    for &(k, second) in &out_next[m] {
                        if k == yi {
                            known += compose_ops(x.index(), y.index(), first, second).op();
                        }
                    }
                }
                // unknown X -> M, then known M -> Y
                if x.prov == Provenance::B {
                    for (m, _) in da.pages[s + 1].iter().enumerate() {
                        let Some(&u) = lookup.get(&(s, xi, m)) else { continue };
                        let Some(&(_, second)) = out_next[m].iter().find(|(k, _)| *k == yi) else {
                            continue;
                        };
                        let u = &unknowns[u];
                        for (k, beta) in u.basis.iter().enumerate() {
                            let beta = SteenrodElement::from(beta.clone());
                            let c = compose_ops(x.index(), y.index(), &beta, second);
                            for term in c.op().terms() {
                                coeffs.entry(term.clone()).or_default().push(var(u, k));
                            }
                        }
                    }
                }
                // known X -> M, then unknown M -> Y
                if y.prov == Provenance::A {
                    for &(m, first) in &out_s[xi] {
                        let Some(&u) = lookup.get(&(s + 1, m, yi)) else { continue };
                        let u = &unknowns[u];
                        for (k, beta) in u.basis.iter().enumerate() {
                            let beta = SteenrodElement::from(beta.clone());
                            let c = compose_ops(x.index(), y.index(), first, &beta);
                            for term in c.op().terms() {
                                coeffs.entry(term.clone()).or_default().push(var(u, k));
                            }
                        }
                    }
                }
                if Block::of(x.prov, y.prov) == Block::AB && !known.is_zero() {
                    return Err(ResolutionError::HalvingResidue {
                        t: da.t,
                        s,
                        from: x.tag().to_string(),
                        to: y.tag().to_string(),
                    });
                }
                for term in known.terms() {
                    coeffs.entry(term.clone()).or_default();
                }
                for (term, vars) in coeffs {
                    origin.push((s, xi, yi));
                    if let Err(e) = system.add_equation(vars, known.contains(&term)) {
                        let (s, xi, yi) = origin[e.equation];
                        let (x, y) = (&da.pages[s][xi], &da.pages[s + 2][yi]);
                        return Err(ResolutionError::Inconsistent {
                            t: da.t,
                            s,
                            block: Block::of(x.prov, y.prov),
                            from: x.tag().to_string(),
                            to: y.tag().to_string(),
                        });
                    }
                }
            }
        }
    }

    let values = system.solve_lex_min();
    let mut out = da.clone();
    for u in &unknowns {
        let deg = da.pages[u.s][u.b].index() - da.pages[u.s + 1][u.a].index();
        let mut op = SteenrodElement::zero(deg);
        for (k, beta) in u.basis.iter().enumerate() {
            if values[var(u, k)] {
                op += &SteenrodElement::from(beta.clone());
            }
        }
        out.set_entry(u.s, u.b, u.a, op);
    }
    Ok(out)
}

/// Identity components of a freshly solved `DA` complex, as
/// `(s, B-source tag, A-target tag)`.
///
/// Each hit is found twice: directly as a unit entry of δ4, and through the
/// criterion that the δ1δ1 composite from the parent `J(2m)` to the target
/// `J(m)` has `Sq^m` coefficient 1. The two must agree.
pub fn find_identity_components(
    da: &BGComplex,
) -> Result<Vec<(usize, String, String)>, ResolutionError> {
    let layout = Layout::of(da);
    let mut direct = Vec::new();
    for (s, i, j) in da.identity_entries() {
        let (x, y) = (&da.pages[s][i], &da.pages[s + 1][j]);
        if x.prov != Provenance::B || y.prov != Provenance::A {
            return Err(ResolutionError::UnexpectedIdentity {
                t: da.t,
                s,
                from: x.tag().to_string(),
                to: y.tag().to_string(),
            });
        }
        direct.push((s, i, j));
    }

    let mut criterion = Vec::new();
    for s in 1..da.s_max {
        for (b, xb) in da.pages[s].iter().enumerate() {
            let Some(p) = layout.parent[s][b] else { continue };
            let m = xb.index();
            let parent = &da.pages[s - 1][p];
            for (a, xa) in da.pages[s + 1].iter().enumerate() {
                if xa.prov != Provenance::A || xa.index() != m {
                    continue;
                }
                let mut composite = SteenrodElement::zero(parent.index() - m);
                for (j, xj) in da.pages[s].iter().enumerate() {
                    if xj.prov != Provenance::A {
                        continue;
                    }
                    if let (Some(f), Some(g)) = (da.entry(s - 1, p, j), da.entry(s, j, a)) {
                        composite += compose_ops(parent.index(), m, f, g).op();
                    }
                }
                if composite.contains(&SteenrodMonomial::sq(m)) {
                    criterion.push((s, b, a));
                }
            }
        }
    }

    let direct_set: std::collections::BTreeSet<_> = direct.iter().copied().collect();
    let criterion_set: std::collections::BTreeSet<_> = criterion.iter().copied().collect();
    if let Some(&(s, i, j)) = direct_set.symmetric_difference(&criterion_set).next() {
        return Err(ResolutionError::IdentityMismatch {
            t: da.t,
            s,
            from: da.pages[s][i].tag().to_string(),
            to: da.pages[s + 1][j].tag().to_string(),
        });
    }
    Ok(direct
        .into_iter()
        .map(|(s, i, j)| {
            (
                s,
                da.pages[s][i].tag().to_string(),
                da.pages[s + 1][j].tag().to_string(),
            )
        })
        .collect())
}

/// Gaussian chain reduction along the identity entry `i -> j` of `∂^s`.
pub fn eliminate(c: &BGComplex, s: usize, i: usize, j: usize) -> Result<BGComplex, ResolutionError> {
    let is_identity = s < c.differential.len()
        && i < c.page(s).len()
        && j < c.page(s + 1).len()
        && c.morphism(s, i, j).is_identity();
    if !is_identity {
        return Err(ResolutionError::NotIdentity {
            t: c.t,
            s,
            from: c.page(s).get(i).map_or_else(String::new, |x| x.tag().to_string()),
            to: c.page(s + 1).get(j).map_or_else(String::new, |x| x.tag().to_string()),
        });
    }
    let mut work = c.clone();
    let into_j: Vec<(usize, SteenrodElement)> = c
        .entries(s)
        .filter(|&(k, jj, _)| jj == j && k != i)
        .map(|(k, _, op)| (k, op.clone()))
        .collect();
    let out_of_i: Vec<(usize, SteenrodElement)> = c
        .entries(s)
        .filter(|&(ii, l, _)| ii == i && l != j)
        .map(|(_, l, op)| (l, op.clone()))
        .collect();
    for (k, a) in &into_j {
        for (l, b) in &out_of_i {
            let src = c.pages[s][*k].index();
            let dst = c.pages[s + 1][*l].index();
            let corr = compose_ops(src, dst, a, b).into_op();
            work.add_to_entry(s, *k, *l, &corr);
        }
    }
    Ok(work.without(s, i, s + 1, j))
}

impl BGComplex {
    /// Drops summand `i` of page `s` and summand `j` of page `s2`.
    fn without(&self, s: usize, i: usize, s2: usize, j: usize) -> BGComplex {
        let mut removed: Vec<Option<usize>> = vec![None; self.pages.len()];
        removed[s] = Some(i);
        removed[s2] = Some(j);
        let remap = |page: usize, pos: usize| -> Option<usize> {
            match removed[page] {
                Some(r) if r == pos => None,
                Some(r) if pos > r => Some(pos - 1),
                _ => Some(pos),
            }
        };
        let pages = self
            .pages
            .iter()
            .enumerate()
            .map(|(p, page)| {
                page.iter()
                    .enumerate()
                    .filter(|&(k, _)| removed[p] != Some(k))
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let differential = self
            .differential
            .iter()
            .enumerate()
            .map(|(p, d)| {
                d.iter()
                    .filter_map(|(&(a, b), op)| {
                        Some(((remap(p, a)?, remap(p + 1, b)?), op.clone()))
                    })
                    .collect()
            })
            .collect();
        BGComplex {
            t: self.t,
            s_max: self.s_max,
            pages,
            differential,
        }
    }
}

/// Cancels identity entries (smallest page, then positions) until none remain.
pub fn minimize(c: &BGComplex) -> Result<BGComplex, ResolutionError> {
    let mut work = c.clone();
    while let Some(&(s, i, j)) = work.identity_entries().first() {
        work = eliminate(&work, s, i, j)?;
    }
    Ok(work)
}

/// One doubling step: the solved `DA(t+1)` and `BG(t+1)`, the latter
/// through page `bg.s_max() - 1`.
pub fn bg_step(bg: &BGComplex) -> Result<(BGComplex, BGComplex), ResolutionError> {
    let s = bg.s_max;
    if s == 0 {
        return Err(ResolutionError::Bound {
            t: bg.t,
            requested: 1,
            available: 0,
        });
    }
    let da = solve_delta4(&build_da(bg, s)?)?;
    da.check_square_zero()?;
    find_identity_components(&da)?;
    let next = minimize(&da)?.truncate(s - 1)?.relabeled();
    Ok((da, next))
}

/// `BG(t)` through page `s_max`.
pub fn bg_resolution(t: u32, s_max: usize) -> Result<BGComplex, ResolutionError> {
    Tower::build(t, s_max)?
        .bg(t)
        .expect("tower reaches t")
        .truncate(s_max)
}

/// `BG(1), ..., BG(t_max)` together with the solved `DA(2), ..., DA(t_max)`,
/// every complex valid through at least page `s_max` (`DA` through `s_max + 1`
/// for `t < t_max`).
#[derive(Clone, Debug)]
pub struct Tower {
    s_max: usize,
    bg: Vec<BGComplex>,
    da: Vec<BGComplex>,
}

impl Tower {
    pub fn build(t_max: u32, s_max: usize) -> Result<Tower, ResolutionError> {
        if t_max == 0 {
            return Err(ResolutionError::BadSphere);
        }
        let depth = s_max + t_max as usize - 1;
        let mut bg = vec![bg_base(depth)];
        let mut da = Vec::new();
        for _ in 1..t_max {
            let (d, next) = bg_step(bg.last().expect("nonempty"))?;
            da.push(d);
            bg.push(next);
        }
        Ok(Tower { s_max, bg, da })
    }

    pub fn t_max(&self) -> u32 {
        self.bg.len() as u32
    }

    pub fn s_max(&self) -> usize {
        self.s_max
    }

    pub fn bg(&self, t: u32) -> Option<&BGComplex> {
        (t >= 1).then(|| self.bg.get(t as usize - 1)).flatten()
    }

    /// The solved, unminimized `DA(t)`.
    pub fn da(&self, t: u32) -> Option<&BGComplex> {
        (t >= 2).then(|| self.da.get(t as usize - 2)).flatten()
    }
}

/// One `(s, d)` where the realized homology differs from `Σ^t F2` at `s = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactnessFailure {
    pub s: usize,
    pub d: u32,
    pub expected: usize,
    pub found: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactnessReport {
    pub t: u32,
    pub d_max: u32,
    pub pages_checked: usize,
    pub failures: Vec<ExactnessFailure>,
}

impl ExactnessReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// No failures in positive cohomological degree.
    pub fn passed_above_zero(&self) -> bool {
        self.failures.iter().all(|f| f.s == 0)
    }
}

/// Realizes the complex in internal degrees `0..=d_max` and checks that its
/// homology is `Σ^t F2` in page 0 and zero above, for pages `< s_max`.
pub fn verify_exactness(c: &BGComplex, d_max: u32) -> ExactnessReport {
    let homology = c.realized_homology(d_max);
    let mut failures = Vec::new();
    for (s, row) in homology.iter().enumerate() {
        for (d, &found) in row.iter().enumerate() {
            let d = d as u32;
            let expected = usize::from(s == 0 && d == c.t);
            if found != expected {
                failures.push(ExactnessFailure { s, d, expected, found });
            }
        }
    }
    ExactnessReport {
        t: c.t,
        d_max,
        pages_checked: homology.len(),
        failures,
    }
}

// ---------------------------------------------------------------------------
// resolution files

#[derive(Debug, Error)]
pub enum FileError {
    #[error("malformed resolution file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("resolution file hash mismatch (stored {stored}, computed {computed})")]
    HashMismatch { stored: String, computed: String },
    #[error("resolution file refers to unknown summand {tag} on page {s}")]
    UnknownTag { s: usize, tag: String },
    #[error("resolution file is inconsistent: {0}")]
    Invalid(String),
}

#[derive(Serialize, Deserialize)]
struct PageRecord {
    s: usize,
    summands: Vec<Summand>,
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    s: usize,
    from: String,
    to: String,
    op: Vec<SteenrodMonomial>,
}

#[derive(Serialize, Deserialize)]
struct Body {
    t: u32,
    s_max: usize,
    pages: Vec<PageRecord>,
    differential: Vec<EntryRecord>,
}

#[derive(Serialize, Deserialize)]
struct FileRecord {
    #[serde(flatten)]
    body: Body,
    hash: String,
}

fn content_hash(body: &Body) -> String {
    let canonical = serde_json::to_string(body).expect("serializable");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

impl BGComplex {
    fn body(&self) -> Body {
        Body {
            t: self.t,
            s_max: self.s_max,
            pages: self
                .pages
                .iter()
                .enumerate()
                .map(|(s, p)| PageRecord {
                    s,
                    summands: p.clone(),
                })
                .collect(),
            differential: (0..self.differential.len())
                .flat_map(|s| {
                    self.entries(s).map(move |(i, j, op)| EntryRecord {
                        s,
                        from: self.pages[s][i].tag().to_string(),
                        to: self.pages[s + 1][j].tag().to_string(),
                        op: op.terms().cloned().collect(),
                    })
                })
                .collect(),
        }
    }

    /// SHA-256 of the canonical compact serialization without the hash field.
    pub fn content_hash(&self) -> String {
        content_hash(&self.body())
    }

    /// The resolution file, pretty-printed with canonical ordering.
    pub fn to_json(&self) -> String {
        let body = self.body();
        let hash = content_hash(&body);
        let mut out = serde_json::to_string_pretty(&FileRecord { body, hash }).expect("serializable");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<BGComplex, FileError> {
        let record: FileRecord = serde_json::from_str(text)?;
        let computed = content_hash(&record.body);
        if computed != record.hash {
            return Err(FileError::HashMismatch {
                stored: record.hash,
                computed,
            });
        }
        let body = record.body;
        if body.pages.len() != body.s_max + 1 {
            return Err(FileError::Invalid(format!(
                "{} pages for s_max {}",
                body.pages.len(),
                body.s_max
            )));
        }
        let mut c = BGComplex::empty(body.t, body.s_max);
        for (k, page) in body.pages.into_iter().enumerate() {
            if page.s != k {
                return Err(FileError::Invalid(format!("page {} listed at position {k}", page.s)));
            }
            c.pages[k] = page.summands;
        }
        for e in body.differential {
            if e.s >= c.differential.len() {
                return Err(FileError::Invalid(format!("differential beyond page {}", e.s)));
            }
            let i = c.position(e.s, &e.from).ok_or_else(|| FileError::UnknownTag {
                s: e.s,
                tag: e.from.clone(),
            })?;
            let j = c.position(e.s + 1, &e.to).ok_or_else(|| FileError::UnknownTag {
                s: e.s + 1,
                tag: e.to.clone(),
            })?;
            let (m, n) = (c.pages[e.s][i].index(), c.pages[e.s + 1][j].index());
            if m < n {
                return Err(FileError::Invalid(format!("entry J({m})->J({n}) cannot be nonzero")));
            }
            let mut op = SteenrodElement::zero(m - n);
            for mono in e.op {
                op.toggle(mono)
                    .map_err(|err| FileError::Invalid(err.to_string()))?;
            }
            if op.max_excess().is_some_and(|x| x > n) {
                return Err(FileError::Invalid(format!(
                    "entry {}->{} is not excess-truncated",
                    e.from, e.to
                )));
            }
            c.set_entry(e.s, i, j, op);
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indices(c: &BGComplex) -> Vec<Vec<u32>> {
        c.pages.iter().map(|p| p.iter().map(Summand::index).collect()).collect()
    }

    #[test]
    fn base_complex() {
        let b = bg_base(3);
        assert_eq!(indices(&b), vec![vec![1], vec![], vec![], vec![]]);
        let h = b.realized_homology(4);
        assert_eq!(h[0], vec![0, 1, 0, 0, 0]);
        assert!(verify_exactness(&b, 4).passed());
    }

    #[test]
    fn da_shapes() {
        let bg1 = bg_base(4);
        let da2 = build_da(&bg1, 4).unwrap();
        assert_eq!(indices(&da2)[..2], [vec![2], vec![1]]);
        assert_eq!(da2.entry(0, 0, 0), Some(&SteenrodElement::sq(1)));

        let bg2 = bg_step(&bg1).unwrap().1;
        let da3 = build_da(&bg2, 3).unwrap();
        assert_eq!(indices(&da3)[..3], [vec![3], vec![2], vec![1]]);
        assert_eq!(da3.entry(0, 0, 0), Some(&SteenrodElement::sq(1)));
        assert_eq!(da3.entry(1, 0, 0), Some(&SteenrodElement::sq(1)));
        assert_eq!(da3.page(2)[0].prov, Provenance::B);

        let bg3 = bg_step(&bg2).unwrap().1;
        let da4 = build_da(&bg3, 2).unwrap();
        assert_eq!(indices(&da4), vec![vec![4], vec![3, 2], vec![2]]);
        let bg3_deep = bg_step(&bg_step(&bg_base(6)).unwrap().1).unwrap().1;
        let da4 = build_da(&bg3_deep, 4).unwrap();
        assert_eq!(indices(&da4), vec![vec![4], vec![3, 2], vec![2], vec![1], vec![]]);
    }

    #[test]
    fn no_unknowns_for_small_da() {
        let bg1 = bg_base(4);
        let da2 = build_da(&bg1, 4).unwrap();
        assert_eq!(solve_delta4(&da2).unwrap(), da2);
        assert!(find_identity_components(&da2).unwrap().is_empty());
        assert_eq!(minimize(&da2).unwrap(), da2);
    }

    #[test]
    fn da4_correction_vanishes() {
        let bg3 = bg_step(&bg_step(&bg_base(6)).unwrap().1).unwrap().1;
        let da4 = build_da(&bg3, 4).unwrap();
        let solved = solve_delta4(&da4).unwrap();
        // The only candidate B(s=1) J(2) -> A(s=2) J(2) is forced to zero.
        let b = solved.position(1, "B0.0").unwrap();
        let a = solved.position(2, "A2.0").unwrap();
        assert_eq!(solved.entry(1, b, a), None);
        assert_eq!(solved, da4);
        assert!(find_identity_components(&solved).unwrap().is_empty());
        assert_eq!(minimize(&solved).unwrap(), solved);
    }

    #[test]
    fn bg4_fixture() {
        let bg4 = bg_resolution(4, 4).unwrap();
        assert_eq!(indices(&bg4), vec![vec![4], vec![3, 2], vec![2], vec![1], vec![]]);
        assert_eq!(bg4.entry(0, 0, 0), Some(&SteenrodElement::sq(1)));
        assert_eq!(bg4.entry(0, 0, 1), Some(&SteenrodElement::sq(2)));
        assert_eq!(bg4.entry(1, 0, 0), Some(&SteenrodElement::sq(1)));
        assert_eq!(bg4.entry(1, 1, 0), None);
        assert_eq!(bg4.entry(2, 0, 0), Some(&SteenrodElement::sq(1)));
        assert_eq!(bg4.entries(0).count() + bg4.entries(1).count() + bg4.entries(2).count(), 4);
        assert!(verify_exactness(&bg4, 10).passed());
    }

    #[test]
    fn elimination_of_a_two_term_complex() {
        let mut c = BGComplex::empty(3, 1);
        for s in 0..2 {
            c.pages[s].push(Summand {
                summand: BGSummand {
                    index: 3,
                    tag: format!("x{s}"),
                },
                prov: Provenance::A,
                parent: None,
            });
        }
        c.set_entry(0, 0, 0, SteenrodElement::unit());
        let e = eliminate(&c, 0, 0, 0).unwrap();
        assert_eq!(e.num_summands(), 0);
        assert!(matches!(eliminate(&e, 0, 0, 0), Err(ResolutionError::NotIdentity { .. })));
    }

    /// A contractible pair spliced into the middle of BG(3): elimination
    /// must restore the original realized homology.
    #[test]
    fn elimination_preserves_homology() {
        let bg3 = bg_resolution(3, 3).unwrap();
        let mut c = bg3.clone();
        // add J(2) on pages 1 and 2 joined by the identity, plus a cross term
        for s in 1..3 {
            c.pages[s].push(Summand {
                summand: BGSummand {
                    index: 2,
                    tag: format!("extra{s}"),
                },
                prov: Provenance::B,
                parent: None,
            });
        }
        let i = c.page(1).len() - 1;
        let j = c.page(2).len() - 1;
        c.set_entry(1, i, j, SteenrodElement::unit());
        // ∂^0: J(3) -> extra1 by Sq^1, and compensate into page 2 so ∂² = 0
        c.set_entry(0, 0, i, SteenrodElement::sq(1));
        c.set_entry(1, 0, j, SteenrodElement::unit());
        c.check_square_zero().unwrap();
        let before = c.realized_homology(8);
        let reduced = minimize(&c).unwrap();
        assert!(reduced.is_minimal());
        reduced.check_square_zero().unwrap();
        assert_eq!(reduced.realized_homology(8), before);
        assert_eq!(before, bg3.realized_homology(8));
    }

    #[test]
    fn minimize_is_idempotent() {
        let tower = Tower::build(6, 3).unwrap();
        for t in 2..=6 {
            let m = minimize(tower.da(t).unwrap()).unwrap();
            assert_eq!(minimize(&m).unwrap(), m);
        }
    }

    #[test]
    fn non_minimal_input_rejected() {
        let mut c = BGComplex::empty(3, 1);
        for s in 0..2 {
            c.pages[s].push(Summand {
                summand: BGSummand {
                    index: 3,
                    tag: format!("x{s}"),
                },
                prov: Provenance::A,
                parent: None,
            });
        }
        c.set_entry(0, 0, 0, SteenrodElement::unit());
        assert!(matches!(build_da(&c, 1), Err(ResolutionError::NonMinimal { .. })));
        assert!(matches!(build_da(&bg_base(2), 3), Err(ResolutionError::Bound { .. })));
    }

    #[test]
    fn empty_complex_is_vacuously_exact_above_zero() {
        let c = BGComplex::empty(5, 3);
        let r = verify_exactness(&c, 6);
        assert!(r.passed_above_zero());
        assert!(!r.passed());
    }

    #[test]
    fn file_round_trip() {
        let bg = bg_resolution(5, 5).unwrap();
        let text = bg.to_json();
        let back = BGComplex::from_json(&text).unwrap();
        assert_eq!(back, bg);
        assert_eq!(back.to_json(), text);

        let tampered = text.replacen("\"J\": 5", "\"J\": 6", 1);
        assert!(matches!(
            BGComplex::from_json(&tampered),
            Err(FileError::HashMismatch { .. })
        ));
    }

    #[test]
    fn variable_order_does_not_change_counts() {
        let tower = Tower::build(9, 2).unwrap();
        for t in 1..9 {
            let bg = tower.bg(t).unwrap();
            let da = build_da(bg, bg.s_max()).unwrap();
            let a = minimize(&solve_delta4_with(&da, VarOrder::Canonical).unwrap()).unwrap();
            let b = minimize(&solve_delta4_with(&da, VarOrder::Reversed).unwrap()).unwrap();
            assert_eq!(indices(&a), indices(&b), "t={}", t + 1);
        }
    }

    #[test]
    fn file_schema_fields() {
        let text = bg_resolution(2, 2).unwrap().to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["t"], 2);
        assert_eq!(v["pages"][0]["summands"][0]["J"], 2);
        assert_eq!(v["pages"][0]["summands"][0]["prov"], "A");
        assert_eq!(v["pages"][1]["summands"][0]["parent"], "A0.0");
        assert_eq!(v["differential"][0]["op"], serde_json::json!([[1]]));
        assert_eq!(v["hash"].as_str().unwrap().len(), 64);
    }
}
