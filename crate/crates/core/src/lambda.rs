//! The Lambda algebra and its subcomplexes `Λ(n)`, an independent route to
//! `E2^{s,t}(S^n)`.
//!
//! Generators `λ_i` (`i >= 0`); a word `λ_{i_1} ... λ_{i_s}` is admissible
//! when `2 i_j >= i_{j+1}`. Inadmissible pairs rewrite by
//!
//! ```text
//! λ_i λ_{2i+1+m} = Σ_{k>=0} binom(m-k-1, k) λ_{i+m-k} λ_{2i+1+k}
//! ```
//!
//! and `d(λ_i) = Σ_{j>=1} binom(i-j, j) λ_{i-j} λ_{j-1}`, extended as a
//! derivation. `Λ(n)` is spanned by admissibles with `i_1 < n`; a monomial of
//! length `s` and weight `w = s + Σ i_j` contributes to `E2^{s, n+w}(S^n)`.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use rayon::prelude::*;
use serde::Serialize;

use crate::ext_ehp::{ExtChart, ExtEntry};
use crate::gf2::{BitMatrix, BitVec, Echelon};
use crate::steenrod::binom_mod2;

pub fn is_lambda_admissible(indices: &[u32]) -> bool {
    indices.windows(2).all(|p| 2 * p[0] >= p[1])
}

/// An admissible Lambda monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LambdaMonomial(Vec<u32>);

impl LambdaMonomial {
    pub fn new(indices: Vec<u32>) -> Option<Self> {
        is_lambda_admissible(&indices).then_some(LambdaMonomial(indices))
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    /// Homological degree.
    pub fn s(&self) -> usize {
        self.0.len()
    }

    pub fn weight(&self) -> u32 {
        self.0.len() as u32 + self.0.iter().sum::<u32>()
    }

    /// Membership in `Λ(n)`.
    pub fn in_filtration(&self, n: u32) -> bool {
        self.0.first().is_none_or(|&i| i < n)
    }
}

impl fmt::Display for LambdaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// A homogeneous sum of admissible monomials.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LambdaElement {
    s: usize,
    w: u32,
    terms: BTreeSet<LambdaMonomial>,
}

impl LambdaElement {
    pub fn zero(s: usize, w: u32) -> Self {
        LambdaElement {
            s,
            w,
            terms: BTreeSet::new(),
        }
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn weight(&self) -> u32 {
        self.w
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &LambdaMonomial> {
        self.terms.iter()
    }

    pub fn contains(&self, m: &LambdaMonomial) -> bool {
        self.terms.contains(m)
    }

    pub fn toggle(&mut self, m: LambdaMonomial) {
        debug_assert_eq!((m.s(), m.weight()), (self.s, self.w));
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }

    fn add(&mut self, other: &LambdaElement) {
        for m in &other.terms {
            self.toggle(m.clone());
        }
    }
}

impl From<LambdaMonomial> for LambdaElement {
    fn from(m: LambdaMonomial) -> Self {
        let mut e = LambdaElement::zero(m.s(), m.weight());
        e.terms.insert(m);
        e
    }
}

impl fmt::Display for LambdaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" + "))
    }
}

fn word_weight(word: &[u32]) -> u32 {
    word.len() as u32 + word.iter().sum::<u32>()
}

fn first_inadmissible(word: &[u32]) -> Option<usize> {
    word.windows(2).position(|p| 2 * p[0] < p[1])
}

/// The terms of the relation applied to the pair at position `j`.
fn rewrite_pair(word: &[u32], j: usize) -> Vec<Vec<u32>> {
    let (a, b) = (word[j], word[j + 1]);
    let m = i64::from(b) - 2 * i64::from(a) - 1;
    (0..)
        .take_while(|k| m > 2 * k)
        .filter(|&k| binom_mod2(m - k - 1, k))
        .map(|k| {
            let mut w = word.to_vec();
            w[j] = (i64::from(a) + m - k) as u32;
            w[j + 1] = (2 * i64::from(a) + 1 + k) as u32;
            w
        })
        .collect()
}

thread_local! {
    static REDUCE_CACHE: RefCell<HashMap<Vec<u32>, Rc<LambdaElement>>> = RefCell::new(HashMap::new());
    static D_CACHE: RefCell<HashMap<Vec<u32>, Rc<LambdaElement>>> = RefCell::new(HashMap::new());
}

/// Admissible expansion of an arbitrary word, rewriting the leftmost
/// inadmissible pair first.
pub fn reduce(word: &[u32]) -> LambdaElement {
    (*reduce_shared(word)).clone()
}

fn reduce_shared(word: &[u32]) -> Rc<LambdaElement> {
    if let Some(hit) = REDUCE_CACHE.with(|c| c.borrow().get(word).cloned()) {
        return hit;
    }
    let result = match first_inadmissible(word) {
        None => LambdaElement::from(LambdaMonomial(word.to_vec())),
        Some(j) => {
            let mut acc = LambdaElement::zero(word.len(), word_weight(word));
            for w in rewrite_pair(word, j) {
                acc.add(&reduce_shared(&w));
            }
            acc
        }
    };
    let result = Rc::new(result);
    REDUCE_CACHE.with(|c| c.borrow_mut().insert(word.to_vec(), Rc::clone(&result)));
    result
}

/// Admissible expansion where `choose` picks which inadmissible pair to
/// rewrite from the list of candidate positions.
pub fn reduce_by(word: &[u32], choose: &mut dyn FnMut(&[usize]) -> usize) -> LambdaElement {
    let candidates: Vec<usize> = word
        .windows(2)
        .enumerate()
        .filter(|(_, p)| 2 * p[0] < p[1])
        .map(|(j, _)| j)
        .collect();
    if candidates.is_empty() {
        return LambdaElement::from(LambdaMonomial(word.to_vec()));
    }
    let j = candidates[choose(&candidates) % candidates.len()];
    let mut acc = LambdaElement::zero(word.len(), word_weight(word));
    for w in rewrite_pair(word, j) {
        acc.add(&reduce_by(&w, choose));
    }
    acc
}

fn d_generator(i: u32) -> Vec<[u32; 2]> {
    (1..=i)
        .filter(|&j| binom_mod2(i64::from(i - j), i64::from(j)))
        .map(|j| [i - j, j - 1])
        .collect()
}

fn d_monomial(m: &LambdaMonomial) -> Rc<LambdaElement> {
    if let Some(hit) = D_CACHE.with(|c| c.borrow().get(&m.0).cloned()) {
        return hit;
    }
    let mut acc = LambdaElement::zero(m.s() + 1, m.weight());
    for (p, &i) in m.0.iter().enumerate() {
        for pair in d_generator(i) {
            let mut word = Vec::with_capacity(m.0.len() + 1);
            word.extend_from_slice(&m.0[..p]);
            word.extend_from_slice(&pair);
            word.extend_from_slice(&m.0[p + 1..]);
            acc.add(&reduce_shared(&word));
        }
    }
    let acc = Rc::new(acc);
    D_CACHE.with(|c| c.borrow_mut().insert(m.0.clone(), Rc::clone(&acc)));
    acc
}

pub fn lambda_differential(x: &LambdaElement) -> LambdaElement {
    let mut acc = LambdaElement::zero(x.s + 1, x.w);
    for m in &x.terms {
        acc.add(&d_monomial(m));
    }
    acc
}

/// Admissible monomials of length `s` and weight `w` in `Λ(n)`, ascending.
pub fn lambda_admissibles(s: usize, w: u32, n: u32) -> Vec<LambdaMonomial> {
    fn extend(prefix: &mut Vec<u32>, left: usize, rest: u32, cap: u32, out: &mut Vec<LambdaMonomial>) {
        if left == 0 {
            if rest == 0 {
                out.push(LambdaMonomial(prefix.clone()));
            }
            return;
        }
        for i in 0..=cap.min(rest) {
            prefix.push(i);
            extend(prefix, left - 1, rest - i, 2 * i, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    let Some(rest) = w.checked_sub(s as u32) else {
        return out;
    };
    if s > 0 && n == 0 {
        return out;
    }
    extend(&mut Vec::new(), s, rest, n.saturating_sub(1), &mut out);
    out
}

/// The differential `Λ(n)^{s,w} -> Λ(n)^{s+1,w}` as a matrix on the
/// canonical bases.
fn differential_matrix(source: &[LambdaMonomial], target: &[LambdaMonomial]) -> BitMatrix {
    let position: HashMap<&LambdaMonomial, usize> =
        target.iter().enumerate().map(|(k, m)| (m, k)).collect();
    let mut d = BitMatrix::zeros(source.len(), target.len());
    for (r, m) in source.iter().enumerate() {
        for term in d_monomial(m).terms() {
            let c = *position
                .get(term)
                .unwrap_or_else(|| panic!("d{m} leaves the filtration at {term}"));
            d.set(r, c, true);
        }
    }
    d
}

fn element_of(basis: &[LambdaMonomial], v: &BitVec, s: usize, w: u32) -> LambdaElement {
    let mut e = LambdaElement::zero(s, w);
    for k in v.ones() {
        e.toggle(basis[k].clone());
    }
    e
}

fn coordinates(basis: &[LambdaMonomial], x: &LambdaElement) -> BitVec {
    let mut v = BitVec::zeros(basis.len());
    for m in x.terms() {
        let k = basis
            .iter()
            .position(|b| b == m)
            .unwrap_or_else(|| panic!("{m} outside the basis"));
        v.set(k, true);
    }
    v
}

/// Homology of `Λ(n)` at `(s, w)`, with cycle representatives chosen as
/// the RREF kernel vectors that are independent modulo boundaries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LambdaHomology {
    pub n: u32,
    pub s: usize,
    pub w: u32,
    pub dim: usize,
    pub representatives: Vec<LambdaElement>,
}

pub fn homology_at(n: u32, s: usize, w: u32) -> LambdaHomology {
    let basis = lambda_admissibles(s, w, n);
    let outgoing = differential_matrix(&basis, &lambda_admissibles(s + 1, w, n));
    let boundaries = match s.checked_sub(1) {
        Some(prev) => differential_matrix(&lambda_admissibles(prev, w, n), &basis),
        None => BitMatrix::zeros(0, basis.len()),
    };
    let mut span: Vec<BitVec> = Echelon::of_rows(basis.len(), boundaries.rows().iter().cloned()).rows;
    let mut representatives = Vec::new();
    for z in outgoing.left_kernel() {
        let ech = Echelon::of_rows(basis.len(), span.iter().cloned());
        if !ech.contains(&z) {
            representatives.push(element_of(&basis, &z, s, w));
            span.push(z);
        }
    }
    LambdaHomology {
        n,
        s,
        w,
        dim: representatives.len(),
        representatives,
    }
}

/// `E2^{s,t}(S^n)` from `Λ(n)` for `s <= s_max` and `n <= t <= n + w_max`.
pub fn lambda_homology(n: u32, s_max: usize, w_max: u32) -> ExtChart {
    let cells: Vec<(usize, u32)> = (0..=w_max)
        .flat_map(|w| (0..=s_max).map(move |s| (s, w)))
        .collect();
    let results: Vec<LambdaHomology> = cells
        .into_par_iter()
        .map(|(s, w)| homology_at(n, s, w))
        .collect();
    let mut chart = ExtChart::new();
    for h in results {
        chart.insert(
            n,
            h.s,
            n + h.w,
            ExtEntry {
                dim: h.dim,
                basis: h.representatives.iter().map(ToString::to_string).collect(),
            },
        );
    }
    chart
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FiltrationFailure {
    /// `dim Λ(n+1) != dim Λ(n) + dim Λ(2n+1)` (shifted) at `(s, w)`.
    Count { s: usize, w: u32 },
    /// `d(λ_n μ)` differs from `λ_n dμ` modulo `Λ(n)`.
    Differential { mu: LambdaMonomial },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiltrationReport {
    pub n: u32,
    pub cells: usize,
    pub failures: Vec<FiltrationFailure>,
}

impl FiltrationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `0 -> Λ(n) -> Λ(n+1) -> Λ(2n+1) -> 0` on the window, with the
/// quotient identified through `λ_n μ <-> μ` at shift `(s-1, w-n-1)`.
pub fn filtration_check(n: u32, s_max: usize, w_max: u32) -> FiltrationReport {
    let mut failures = Vec::new();
    let mut cells = 0;
    for w in 0..=w_max {
        for s in 0..=s_max {
            cells += 1;
            let bigger = lambda_admissibles(s, w, n + 1);
            let smaller = lambda_admissibles(s, w, n);
            let quotient = match (s.checked_sub(1), w.checked_sub(n + 1)) {
                (Some(qs), Some(qw)) => lambda_admissibles(qs, qw, 2 * n + 1),
                _ => Vec::new(),
            };
            let lifted: BTreeSet<LambdaMonomial> = quotient
                .iter()
                .filter_map(|mu| {
                    let mut word = vec![n];
                    word.extend_from_slice(mu.indices());
                    LambdaMonomial::new(word)
                })
                .collect();
            let fresh: BTreeSet<LambdaMonomial> =
                bigger.iter().filter(|m| !m.in_filtration(n)).cloned().collect();
            if bigger.len() != smaller.len() + quotient.len() || lifted != fresh {
                failures.push(FiltrationFailure::Count { s, w });
            }
            for mu in &quotient {
                let mut word = vec![n];
                word.extend_from_slice(mu.indices());
                let Some(lift) = LambdaMonomial::new(word) else { continue };
                let d_lift = d_monomial(&lift);
                let d_mu = d_monomial(mu);
                let top: BTreeSet<LambdaMonomial> = d_lift
                    .terms()
                    .filter(|m| !m.in_filtration(n))
                    .map(|m| LambdaMonomial(m.indices()[1..].to_vec()))
                    .collect();
                let clean = d_lift.terms().all(|m| m.in_filtration(n + 1));
                if !clean || top != d_mu.terms().cloned().collect() {
                    failures.push(FiltrationFailure::Differential { mu: mu.clone() });
                }
            }
        }
    }
    FiltrationReport { n, cells, failures }
}

/// Rank of the connecting map `H^{s-1, w-n-1}(Λ(2n+1)) -> H^{s+1, w}(Λ(n))`,
/// `[μ] ↦ [d(λ_n μ)]`.
pub fn connecting_rank(n: u32, s: usize, w: u32) -> usize {
    let (Some(qs), Some(qw)) = (s.checked_sub(1), w.checked_sub(n + 1)) else {
        return 0;
    };
    let source = homology_at(2 * n + 1, qs, qw);
    let target_basis = lambda_admissibles(s + 1, w, n);
    let boundaries = differential_matrix(&lambda_admissibles(s, w, n), &target_basis);
    let base = boundaries.rank();
    let mut rows: Vec<BitVec> = boundaries.rows().to_vec();
    for z in &source.representatives {
        let mut lift = LambdaElement::zero(s, w);
        for mu in z.terms() {
            let mut word = vec![n];
            word.extend_from_slice(mu.indices());
            lift.toggle(LambdaMonomial::new(word).expect("μ lies in Λ(2n+1)"));
        }
        rows.push(coordinates(&target_basis, &lambda_differential(&lift)));
    }
    BitMatrix::from_rows(target_basis.len(), rows).rank() - base
}
