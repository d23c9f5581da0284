//! The mod 2 Steenrod algebra in the admissible (Serre-Cartan) basis.
//!
//! A monomial `Sq^{i1} ... Sq^{ik}` is admissible when `i_j >= 2 i_{j+1}`;
//! admissible monomials form an F2-basis. Arbitrary words are brought to
//! that basis by rewriting the leftmost inadmissible pair with the Adem
//! relation
//!
//! ```text
//! Sq^a Sq^b = sum_c C(b-c-1, a-2c) Sq^{a+b-c} Sq^c      (a < 2b)
//! ```
//!
//! Reductions are memoized per thread, keyed by the word.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign};
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitVec, Echelon};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SteenrodError {
    #[error("Sq^0 or a non-positive exponent in word {0:?}")]
    NonPositiveExponent(Vec<u32>),
    #[error("monomial {0:?} is not admissible")]
    NotAdmissible(Vec<u32>),
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: u32, found: u32 },
    #[error("decomposability is undefined in degree 0")]
    DegreeZero,
}

/// `C(a, b) mod 2` by Lucas' theorem; zero outside `0 <= b <= a`.
pub fn binom_mod2(a: i64, b: i64) -> bool {
    if a < 0 || b < 0 || b > a {
        return false;
    }
    (a - b) & b == 0
}

pub fn is_admissible(exponents: &[u32]) -> bool {
    exponents.windows(2).all(|w| w[0] >= 2 * w[1])
}

/// An admissible monomial; the empty sequence is the unit.
///
/// Ordering is descending lexicographic on the exponent sequence, which is
/// the canonical order used for iteration and serialization.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct SteenrodMonomial(Vec<u32>);

impl SteenrodMonomial {
    pub fn unit() -> Self {
        SteenrodMonomial(Vec::new())
    }

    pub fn sq(i: u32) -> Self {
        assert!(i > 0, "Sq^0 is the unit");
        SteenrodMonomial(vec![i])
    }

    pub fn new(exponents: Vec<u32>) -> Result<Self, SteenrodError> {
        if exponents.contains(&0) {
            return Err(SteenrodError::NonPositiveExponent(exponents));
        }
        if !is_admissible(&exponents) {
            return Err(SteenrodError::NotAdmissible(exponents));
        }
        Ok(SteenrodMonomial(exponents))
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `i1 - (i2 + ... + ik)`; zero for the unit.
    pub fn excess(&self) -> u32 {
        match self.0.split_first() {
            None => 0,
            Some((first, rest)) => first - rest.iter().sum::<u32>(),
        }
    }

    /// Exponentwise half, if every exponent is even.
    pub fn halve(&self) -> Option<SteenrodMonomial> {
        if self.0.iter().all(|i| i % 2 == 0) {
            Some(SteenrodMonomial(self.0.iter().map(|i| i / 2).collect()))
        } else {
            None
        }
    }
}

impl Ord for SteenrodMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.cmp(&self.0)
    }
}

impl PartialOrd for SteenrodMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TryFrom<Vec<u32>> for SteenrodMonomial {
    type Error = SteenrodError;

    fn try_from(v: Vec<u32>) -> Result<Self, Self::Error> {
        SteenrodMonomial::new(v)
    }
}

impl From<SteenrodMonomial> for Vec<u32> {
    fn from(m: SteenrodMonomial) -> Self {
        m.0
    }
}

impl fmt::Display for SteenrodMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.0.iter().map(|i| format!("Sq^{i}")).collect();
        f.write_str(&parts.join(" "))
    }
}

/// A homogeneous F2-linear combination of admissible monomials.
///
/// The degree is stored explicitly so that zero keeps its grading.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "ElementRepr", into = "ElementRepr")]
pub struct SteenrodElement {
    degree: u32,
    terms: BTreeSet<SteenrodMonomial>,
}

#[derive(Serialize, Deserialize)]
struct ElementRepr {
    degree: u32,
    terms: Vec<SteenrodMonomial>,
}

impl TryFrom<ElementRepr> for SteenrodElement {
    type Error = SteenrodError;

    fn try_from(r: ElementRepr) -> Result<Self, Self::Error> {
        let mut x = SteenrodElement::zero(r.degree);
        for m in r.terms {
            x.toggle(m)?;
        }
        Ok(x)
    }
}

impl From<SteenrodElement> for ElementRepr {
    fn from(x: SteenrodElement) -> Self {
        ElementRepr {
            degree: x.degree,
            terms: x.terms.into_iter().collect(),
        }
    }
}

impl SteenrodElement {
    pub fn zero(degree: u32) -> Self {
        SteenrodElement {
            degree,
            terms: BTreeSet::new(),
        }
    }

    pub fn unit() -> Self {
        Self::from(SteenrodMonomial::unit())
    }

    /// `Sq^i`, with `Sq^0` the unit.
    pub fn sq(i: u32) -> Self {
        if i == 0 {
            Self::unit()
        } else {
            Self::from(SteenrodMonomial::sq(i))
        }
    }

    /// Builds an element from admissible exponent sequences; repeated
    /// monomials cancel.
    pub fn from_exponents(degree: u32, monomials: &[&[u32]]) -> Result<Self, SteenrodError> {
        let mut x = Self::zero(degree);
        for m in monomials {
            x.toggle(SteenrodMonomial::new(m.to_vec())?)?;
        }
        Ok(x)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.degree == 0 && self.terms.len() == 1
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = &SteenrodMonomial> {
        self.terms.iter()
    }

    pub fn contains(&self, m: &SteenrodMonomial) -> bool {
        self.terms.contains(m)
    }

    /// Adds one monomial (F2: an existing copy cancels).
    pub fn toggle(&mut self, m: SteenrodMonomial) -> Result<(), SteenrodError> {
        if m.degree() != self.degree {
            return Err(SteenrodError::DegreeMismatch {
                expected: self.degree,
                found: m.degree(),
            });
        }
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
        Ok(())
    }

    fn toggle_unchecked(&mut self, m: &SteenrodMonomial) {
        if !self.terms.remove(m) {
            self.terms.insert(m.clone());
        }
    }

    pub fn multiply(&self, other: &SteenrodElement) -> SteenrodElement {
        let mut out = SteenrodElement::zero(self.degree + other.degree);
        for a in &self.terms {
            for b in &other.terms {
                let prod = multiply_monomials(a, b);
                for m in prod.iter() {
                    out.toggle_unchecked(m);
                }
            }
        }
        out
    }

    /// The Verschiebung `Sq^{2i} -> Sq^i`, `Sq^{odd} -> 0`, termwise.
    pub fn halve(&self) -> SteenrodElement {
        let mut out = SteenrodElement::zero(self.degree / 2);
        if self.degree % 2 == 1 {
            return out;
        }
        for m in &self.terms {
            if let Some(h) = m.halve() {
                out.toggle_unchecked(&h);
            }
        }
        out
    }

    /// Drops every term of excess greater than `bound`.
    pub fn truncate_excess(&self, bound: u32) -> SteenrodElement {
        SteenrodElement {
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .filter(|m| m.excess() <= bound)
                .cloned()
                .collect(),
        }
    }

    pub fn max_excess(&self) -> Option<u32> {
        self.terms.iter().map(SteenrodMonomial::excess).max()
    }

    /// Membership in the span of products of two positive-degree elements.
    pub fn is_decomposable(&self) -> Result<bool, SteenrodError> {
        if self.degree == 0 {
            return Err(SteenrodError::DegreeZero);
        }
        let d = self.degree;
        let basis = admissible_basis(d, d);
        let index: HashMap<&SteenrodMonomial, usize> =
            basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let to_vec = |x: &SteenrodElement| {
            let mut v = BitVec::zeros(basis.len());
            for m in x.terms() {
                v.flip(index[m]);
            }
            v
        };
        let mut products = Vec::new();
        for i in 1..d {
            let left = admissible_basis(i, i);
            let right = admissible_basis(d - i, d - i);
            for a in &left {
                for b in &right {
                    let p = SteenrodElement::from(a.clone()).multiply(&SteenrodElement::from(b.clone()));
                    products.push(to_vec(&p));
                }
            }
        }
        let span = Echelon::of_rows(basis.len(), products);
        Ok(span.contains(&to_vec(self)))
    }
}

impl From<SteenrodMonomial> for SteenrodElement {
    fn from(m: SteenrodMonomial) -> Self {
        SteenrodElement {
            degree: m.degree(),
            terms: BTreeSet::from([m]),
        }
    }
}

impl AddAssign<&SteenrodElement> for SteenrodElement {
    fn add_assign(&mut self, rhs: &SteenrodElement) {
        assert_eq!(self.degree, rhs.degree, "adding elements of different degrees");
        for m in &rhs.terms {
            self.toggle_unchecked(m);
        }
    }
}

impl Add for &SteenrodElement {
    type Output = SteenrodElement;

    fn add(self, rhs: &SteenrodElement) -> SteenrodElement {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl fmt::Display for SteenrodElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" + "))
    }
}

type Reduced = Rc<BTreeSet<SteenrodMonomial>>;

thread_local! {
    static REDUCE_CACHE: RefCell<HashMap<Vec<u32>, Reduced>> = RefCell::new(HashMap::new());
}

/// Admissible expansion of an arbitrary word of positive exponents.
pub fn adem_reduce(word: &[u32]) -> Result<SteenrodElement, SteenrodError> {
    if word.contains(&0) {
        return Err(SteenrodError::NonPositiveExponent(word.to_vec()));
    }
    Ok(SteenrodElement {
        degree: word.iter().sum(),
        terms: (*reduce_word(word)).clone(),
    })
}

fn multiply_monomials(a: &SteenrodMonomial, b: &SteenrodMonomial) -> Reduced {
    let mut word = Vec::with_capacity(a.0.len() + b.0.len());
    word.extend_from_slice(&a.0);
    word.extend_from_slice(&b.0);
    reduce_word(&word)
}

fn reduce_word(word: &[u32]) -> Reduced {
    let Some(j) = word.windows(2).position(|w| w[0] < 2 * w[1]) else {
        return Rc::new(BTreeSet::from([SteenrodMonomial(word.to_vec())]));
    };
    if let Some(hit) = REDUCE_CACHE.with(|c| c.borrow().get(word).cloned()) {
        return hit;
    }
    let (a, b) = (word[j], word[j + 1]);
    let mut out = BTreeSet::new();
    for c in 0..=a / 2 {
        if !binom_mod2(i64::from(b - c - 1), i64::from(a - 2 * c)) {
            continue;
        }
        let mut next = Vec::with_capacity(word.len());
        next.extend_from_slice(&word[..j]);
        next.push(a + b - c);
        if c > 0 {
            next.push(c);
        }
        next.extend_from_slice(&word[j + 2..]);
        for m in reduce_word(&next).iter() {
            if !out.remove(m) {
                out.insert(m.clone());
            }
        }
    }
    let out = Rc::new(out);
    REDUCE_CACHE.with(|c| c.borrow_mut().insert(word.to_vec(), out.clone()));
    out
}

type BasisCache = HashMap<(u32, u32), Rc<Vec<SteenrodMonomial>>>;

thread_local! {
    static BASIS_CACHE: RefCell<BasisCache> = RefCell::new(HashMap::new());
}

/// Admissible monomials of `degree` with excess at most `excess_bound`, in
/// canonical (descending lexicographic) order.
pub fn admissible_basis(degree: u32, excess_bound: u32) -> Vec<SteenrodMonomial> {
    admissible_basis_shared(degree, excess_bound).to_vec()
}

pub(crate) fn admissible_basis_shared(degree: u32, excess_bound: u32) -> Rc<Vec<SteenrodMonomial>> {
    if let Some(hit) = BASIS_CACHE.with(|c| c.borrow().get(&(degree, excess_bound)).cloned()) {
        return hit;
    }
    let mut out = Vec::new();
    if degree == 0 {
        out.push(SteenrodMonomial::unit());
    } else {
        // excess = 2 i1 - degree
        let max_first = (degree + excess_bound) / 2;
        let mut prefix = Vec::new();
        extend_admissible(degree, max_first.min(degree), &mut prefix, &mut out);
    }
    let out = Rc::new(out);
    BASIS_CACHE.with(|c| c.borrow_mut().insert((degree, excess_bound), out.clone()));
    out
}

fn extend_admissible(
    remaining: u32,
    max_next: u32,
    prefix: &mut Vec<u32>,
    out: &mut Vec<SteenrodMonomial>,
) {
    if remaining == 0 {
        out.push(SteenrodMonomial(prefix.clone()));
        return;
    }
    for i in (1..=max_next.min(remaining)).rev() {
        // the tail after Sq^i sums to at most i - 1 (i/2 + i/4 + ...)
        if remaining - i > i.saturating_sub(1) {
            continue;
        }
        prefix.push(i);
        extend_admissible(remaining - i, i / 2, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(degree: u32, terms: &[&[u32]]) -> SteenrodElement {
        SteenrodElement::from_exponents(degree, terms).unwrap()
    }

    /// Factorial-based binomial for the oracle.
    fn binom_exact(a: u64, b: u64) -> u128 {
        if b > a {
            return 0;
        }
        (0..b).fold(1u128, |acc, k| acc * u128::from(a - k) / u128::from(k + 1))
    }

    #[test]
    fn binomials() {
        assert!(binom_mod2(5, 0));
        assert!(!binom_mod2(2, 1));
        assert!(binom_mod2(3, 1));
        assert!(!binom_mod2(-1, 0));
        assert!(!binom_mod2(3, -1));
        assert!(!binom_mod2(2, 3));
        for a in 0..40u64 {
            for b in 0..=a {
                assert_eq!(
                    binom_mod2(a as i64, b as i64),
                    binom_exact(a, b) % 2 == 1,
                    "C({a},{b})"
                );
            }
        }
    }

    #[test]
    fn adem_examples() {
        assert!(adem_reduce(&[1, 1]).unwrap().is_zero());
        assert_eq!(adem_reduce(&[2, 2]).unwrap(), el(4, &[&[3, 1]]));
        assert_eq!(adem_reduce(&[3]).unwrap(), el(3, &[&[3]]));
        assert_eq!(adem_reduce(&[1, 2]).unwrap(), el(3, &[&[3]]));
        // Sq^2 Sq^3 = Sq^5 + Sq^4 Sq^1
        assert_eq!(adem_reduce(&[2, 3]).unwrap(), el(5, &[&[5], &[4, 1]]));
        // Sq^3 Sq^3 = Sq^5 Sq^1
        assert_eq!(adem_reduce(&[3, 3]).unwrap(), el(6, &[&[5, 1]]));
        assert!(matches!(
            adem_reduce(&[2, 0]),
            Err(SteenrodError::NonPositiveExponent(_))
        ));
    }

    #[test]
    fn products() {
        let sq = SteenrodElement::sq;
        assert_eq!(sq(1).multiply(&sq(2)), el(3, &[&[3]]));
        assert_eq!(sq(2).multiply(&sq(2)), el(4, &[&[3, 1]]));
        assert!(sq(1).multiply(&sq(1)).is_zero());
        let x = el(5, &[&[4, 1], &[5]]);
        assert_eq!(SteenrodElement::unit().multiply(&x), x);
        assert_eq!(x.multiply(&SteenrodElement::unit()), x);
        assert_eq!(SteenrodElement::zero(2).multiply(&x).degree(), 7);
    }

    #[test]
    fn basis_examples() {
        let b = admissible_basis(3, 3);
        assert_eq!(
            b,
            vec![
                SteenrodMonomial::new(vec![3]).unwrap(),
                SteenrodMonomial::new(vec![2, 1]).unwrap()
            ]
        );
        assert!(admissible_basis(2, 1).is_empty());
        assert_eq!(admissible_basis(0, 5), vec![SteenrodMonomial::unit()]);
        assert_eq!(admissible_basis(0, 0), vec![SteenrodMonomial::unit()]);
    }

    /// Independent generator: every composition of `d` into positive parts,
    /// filtered by admissibility and excess.
    fn brute_force_basis(d: u32, bound: u32) -> BTreeSet<Vec<u32>> {
        fn compositions(d: u32) -> Vec<Vec<u32>> {
            if d == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for first in 1..=d {
                for mut rest in compositions(d - first) {
                    rest.insert(0, first);
                    out.push(rest);
                }
            }
            out
        }
        compositions(d)
            .into_iter()
            .filter(|c| is_admissible(c))
            .filter(|c| {
                let ex = c.first().map_or(0, |f| 2 * f - d);
                ex <= bound
            })
            .collect()
    }

    #[test]
    fn basis_counts_match_brute_force() {
        for d in 0..=16 {
            for bound in [0, 1, d / 2, d] {
                let ours: BTreeSet<Vec<u32>> = admissible_basis(d, bound)
                    .into_iter()
                    .map(Vec::from)
                    .collect();
                assert_eq!(ours, brute_force_basis(d, bound), "degree {d} bound {bound}");
            }
        }
        let counts: Vec<usize> = (0..=10).map(|d| admissible_basis(d, d).len()).collect();
        // dim A_d for d = 0..10
        assert_eq!(counts, vec![1, 1, 1, 2, 2, 2, 3, 4, 4, 5, 6]);
    }

    #[test]
    fn canonical_order_is_descending() {
        let b = admissible_basis(12, 12);
        for w in b.windows(2) {
            assert!(w[0].exponents() > w[1].exponents());
        }
    }

    #[test]
    fn halving() {
        assert_eq!(el(6, &[&[4, 2]]).halve(), el(3, &[&[2, 1]]));
        assert!(el(3, &[&[3]]).halve().is_zero());
        assert_eq!(SteenrodElement::unit().halve(), SteenrodElement::unit());
        assert!(el(5, &[&[4, 1]]).halve().is_zero());
    }

    #[test]
    fn truncation() {
        assert!(el(2, &[&[2]]).truncate_excess(1).is_zero());
        assert_eq!(el(3, &[&[2, 1]]).truncate_excess(1), el(3, &[&[2, 1]]));
        assert!(SteenrodElement::zero(4).truncate_excess(0).is_zero());
        assert_eq!(SteenrodElement::zero(4).truncate_excess(0).degree(), 4);
    }

    #[test]
    fn decomposability() {
        let sq = SteenrodElement::sq;
        assert!(!sq(2).is_decomposable().unwrap());
        assert!(sq(3).is_decomposable().unwrap());
        assert!(!sq(4).is_decomposable().unwrap());
        assert!(!sq(1).is_decomposable().unwrap());
        assert_eq!(
            SteenrodElement::unit().is_decomposable(),
            Err(SteenrodError::DegreeZero)
        );
    }

    #[test]
    fn serialization_shape() {
        let x = el(4, &[&[3, 1]]);
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, r#"{"degree":4,"terms":[[3,1]]}"#);
        let z = SteenrodElement::zero(3);
        assert_eq!(serde_json::to_string(&z).unwrap(), r#"{"degree":3,"terms":[]}"#);
        let u = SteenrodElement::unit();
        assert_eq!(serde_json::to_string(&u).unwrap(), r#"{"degree":0,"terms":[[]]}"#);
        let bad: Result<SteenrodElement, _> = serde_json::from_str(r#"{"degree":3,"terms":[[1,2]]}"#);
        assert!(bad.is_err());
    }
}
