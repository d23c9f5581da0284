//! Finite direct sums of Brown-Gitler modules and the morphisms between them.
//!
//! `Hom(J(m), J(n))` has basis the admissible monomials of degree `m - n`
//! and excess at most `n`, so a morphism is stored as the representing
//! operation in that normal form. Under the duality `J(n)^d = (F(d)^n)^*`
//! with the free unstable modules `F(d)`, the morphism `•θ : J(m) -> J(n)`
//! is dual to `F(d)^n -> F(d)^m, Sq^J ι -> θ Sq^J ι`. Consequently composing
//! `•θ` after `•φ` is `•(φ θ)`, and realized matrices compose as
//! `realize(g ∘ f) = realize(f) · realize(g)` (row vectors, rows = source).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::BitMatrix;
use crate::steenrod::{admissible_basis_shared, SteenrodElement, SteenrodMonomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphismError {
    #[error("cannot compose J({first_source})->J({first_target}) with J({second_source})->J({second_target})")]
    Endpoints {
        first_source: u32,
        first_target: u32,
        second_source: u32,
        second_target: u32,
    },
    #[error("operation of degree {found} cannot represent a morphism J({from})->J({to})")]
    Degree { from: u32, to: u32, found: u32 },
    #[error("halving needs even endpoints, got J({from})->J({to})")]
    OddEndpoint { from: u32, to: u32 },
}

/// One direct summand `J(n)` with a tag telling copies apart.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BGSummand {
    #[serde(rename = "J")]
    pub index: u32,
    pub tag: String,
}

/// A morphism `J(source) -> J(target)` in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BGMorphism {
    source: u32,
    target: u32,
    op: SteenrodElement,
}

impl BGMorphism {
    /// Normalizes `op` by excess truncation at the target index.
    pub fn new(source: u32, target: u32, op: SteenrodElement) -> Result<Self, MorphismError> {
        if source < target {
            if op.is_zero() {
                return Ok(Self::zero(source, target));
            }
            return Err(MorphismError::Degree {
                from: source,
                to: target,
                found: op.degree(),
            });
        }
        if op.degree() != source - target {
            return Err(MorphismError::Degree {
                from: source,
                to: target,
                found: op.degree(),
            });
        }
        Ok(BGMorphism {
            source,
            target,
            op: op.truncate_excess(target),
        })
    }

    pub fn zero(source: u32, target: u32) -> Self {
        BGMorphism {
            source,
            target,
            op: SteenrodElement::zero(source.saturating_sub(target)),
        }
    }

    pub fn identity(n: u32) -> Self {
        BGMorphism {
            source: n,
            target: n,
            op: SteenrodElement::unit(),
        }
    }

    pub fn source(&self) -> u32 {
        self.source
    }

    pub fn target(&self) -> u32 {
        self.target
    }

    pub fn op(&self) -> &SteenrodElement {
        &self.op
    }

    pub fn into_op(self) -> SteenrodElement {
        self.op
    }

    pub fn is_zero(&self) -> bool {
        self.op.is_zero()
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.op.is_unit()
    }

    /// Coefficient of the unit, meaningful for endomorphisms.
    pub fn scalar(&self) -> bool {
        self.source == self.target && self.op.contains(&SteenrodMonomial::unit())
    }
}

/// `second ∘ first`.
pub fn compose(second: &BGMorphism, first: &BGMorphism) -> Result<BGMorphism, MorphismError> {
    if first.target != second.source {
        return Err(MorphismError::Endpoints {
            first_source: first.source,
            first_target: first.target,
            second_source: second.source,
            second_target: second.target,
        });
    }
    Ok(compose_ops(first.source, second.target, &first.op, &second.op))
}

/// Composite of `•first_op : J(source) -> J(k)` and `•second_op : J(k) -> J(target)`,
/// without materializing the middle index.
pub(crate) fn compose_ops(
    source: u32,
    target: u32,
    first_op: &SteenrodElement,
    second_op: &SteenrodElement,
) -> BGMorphism {
    if first_op.is_zero() || second_op.is_zero() || source < target {
        return BGMorphism::zero(source, target);
    }
    BGMorphism {
        source,
        target,
        op: first_op.multiply(second_op).truncate_excess(target),
    }
}

/// The surjection `J(2k) -> J(k)` of the Mahowald sequence ending at `J(n)`;
/// `None` when `n` is odd (the quotient is trivial).
pub fn mahowald_surjection(n: u32) -> Option<BGMorphism> {
    if n == 0 || n % 2 == 1 {
        return None;
    }
    let k = n / 2;
    Some(BGMorphism {
        source: n,
        target: k,
        op: SteenrodElement::sq(k),
    })
}

/// The same operation viewed as `J(m+1) -> J(n+1)`.
pub fn suspend_morphism(f: &BGMorphism) -> BGMorphism {
    BGMorphism {
        source: f.source + 1,
        target: f.target + 1,
        op: f.op.truncate_excess(f.target + 1),
    }
}

/// The induced map on Mahowald quotients, `•V(θ) : J(m/2) -> J(n/2)`.
pub fn halve_morphism(f: &BGMorphism) -> Result<BGMorphism, MorphismError> {
    if f.source % 2 == 1 || f.target % 2 == 1 {
        return Err(MorphismError::OddEndpoint {
            from: f.source,
            to: f.target,
        });
    }
    let target = f.target / 2;
    Ok(BGMorphism {
        source: f.source / 2,
        target,
        op: f.op.halve().truncate_excess(target),
    })
}

/// Canonical basis of `J(n)^d`: admissible monomials of degree `n - d` and
/// excess at most `d`. Empty above degree `n`.
pub fn realize_slice(n: u32, d: u32) -> Vec<SteenrodMonomial> {
    if d > n {
        return Vec::new();
    }
    admissible_basis_shared(n - d, d).to_vec()
}

/// Matrix of `f` on degree-`d` slices. Entry `(I, J)` is the coefficient of
/// `Sq^I` in `θ · Sq^J` truncated at excess `d`, with `I` ranging over the
/// source slice and `J` over the target slice.
pub fn realize_morphism(f: &BGMorphism, d: u32) -> BitMatrix {
    let rows = if d > f.source {
        std::rc::Rc::new(Vec::new())
    } else {
        admissible_basis_shared(f.source - d, d)
    };
    let cols = if d > f.target {
        std::rc::Rc::new(Vec::new())
    } else {
        admissible_basis_shared(f.target - d, d)
    };
    let mut m = BitMatrix::zeros(rows.len(), cols.len());
    if f.is_zero() || rows.is_empty() || cols.is_empty() {
        return m;
    }
    let row_index: std::collections::HashMap<&SteenrodMonomial, usize> =
        rows.iter().enumerate().map(|(i, x)| (x, i)).collect();
    for (c, basis) in cols.iter().enumerate() {
        let image = f
            .op
            .multiply(&SteenrodElement::from(basis.clone()))
            .truncate_excess(d);
        for term in image.terms() {
            let r = row_index[term];
            m.set(r, c, true);
        }
    }
    m
}

/// Inclusion `(ΣJ(n))^d = J(n)^{d-1} -> J(n+1)^d`: the basis of excess at
/// most `d - 1` is a subset of the basis of excess at most `d`.
pub fn mahowald_inclusion(n: u32, d: u32) -> BitMatrix {
    let source = if d == 0 { Vec::new() } else { realize_slice(n, d - 1) };
    let target = realize_slice(n + 1, d);
    let mut m = BitMatrix::zeros(source.len(), target.len());
    for (r, x) in source.iter().enumerate() {
        let c = target
            .iter()
            .position(|y| y == x)
            .expect("suspended slice embeds in the next Brown-Gitler module");
        m.set(r, c, true);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mor(source: u32, target: u32, terms: &[&[u32]]) -> BGMorphism {
        let op = SteenrodElement::from_exponents(source - target, terms).unwrap();
        BGMorphism::new(source, target, op).unwrap()
    }

    #[test]
    fn composition_examples() {
        let a = mor(3, 2, &[&[1]]);
        let b = mor(2, 1, &[&[1]]);
        assert!(compose(&b, &a).unwrap().is_zero());

        let f = mor(5, 2, &[&[2, 1]]);
        assert_eq!(compose(&BGMorphism::identity(2), &f).unwrap(), f);
        assert_eq!(compose(&f, &BGMorphism::identity(5)).unwrap(), f);

        let c = mor(4, 2, &[&[2]]);
        let g = compose(&b, &c).unwrap();
        assert_eq!(g, mor(4, 1, &[&[2, 1]]));

        assert!(matches!(compose(&c, &a), Err(MorphismError::Endpoints { .. })));
    }

    #[test]
    fn normal_form() {
        // Sq^2 has excess 2 > 1, so it gives the zero map J(3) -> J(1).
        assert!(mor(3, 1, &[&[2]]).is_zero());
        assert!(BGMorphism::new(3, 1, SteenrodElement::sq(1)).is_err());
        assert!(BGMorphism::new(1, 3, SteenrodElement::zero(0)).unwrap().is_zero());
    }

    #[test]
    fn mahowald_surjections() {
        assert_eq!(mahowald_surjection(4), Some(mor(4, 2, &[&[2]])));
        assert_eq!(mahowald_surjection(3), None);
        assert_eq!(mahowald_surjection(2), Some(mor(2, 1, &[&[1]])));
    }

    #[test]
    fn suspension() {
        assert_eq!(suspend_morphism(&mor(2, 1, &[&[1]])), mor(3, 2, &[&[1]]));
        assert!(suspend_morphism(&BGMorphism::zero(4, 2)).is_zero());
        assert_eq!(suspend_morphism(&mor(4, 1, &[&[2, 1]])), mor(5, 2, &[&[2, 1]]));
    }

    #[test]
    fn halving() {
        assert_eq!(halve_morphism(&mor(4, 2, &[&[2]])).unwrap(), mor(2, 1, &[&[1]]));
        assert!(halve_morphism(&BGMorphism::zero(6, 3)).is_err());
        assert!(matches!(
            halve_morphism(&mor(4, 3, &[&[1]])),
            Err(MorphismError::OddEndpoint { .. })
        ));
    }

    #[test]
    fn slices() {
        assert_eq!(realize_slice(2, 1), vec![SteenrodMonomial::sq(1)]);
        assert!(realize_slice(3, 1).is_empty());
        for n in 0..8 {
            assert_eq!(realize_slice(n, n), vec![SteenrodMonomial::unit()]);
            assert!(realize_slice(n, n + 1).is_empty());
        }
    }

    #[test]
    fn realization_examples() {
        let m = realize_morphism(&mor(2, 1, &[&[1]]), 1);
        assert_eq!(m, BitMatrix::identity(1));
        let z = realize_morphism(&BGMorphism::zero(4, 2), 2);
        assert!(z.is_zero());
        let m = realize_morphism(&mor(4, 2, &[&[2]]), 2);
        assert_eq!(m, BitMatrix::identity(1));
    }

    /// All morphisms `J(m) -> J(n)` spanned by single basis monomials.
    fn basis_morphisms(m: u32, n: u32) -> Vec<BGMorphism> {
        if m < n {
            return Vec::new();
        }
        crate::steenrod::admissible_basis(m - n, n)
            .into_iter()
            .map(|x| BGMorphism::new(m, n, SteenrodElement::from(x)).unwrap())
            .collect()
    }

    #[test]
    fn functoriality() {
        for a in 1..=12u32 {
            for b in 1..=a {
                for c in 1..=b {
                    for f in basis_morphisms(a, b) {
                        for g in basis_morphisms(b, c) {
                            let gf = compose(&g, &f).unwrap();
                            for d in 0..=12 {
                                let lhs = realize_morphism(&gf, d);
                                let rhs = realize_morphism(&f, d).mul(&realize_morphism(&g, d));
                                assert_eq!(lhs, rhs, "{a}->{b}->{c} in degree {d}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn nonzero_morphisms_realize_nonzero() {
        for m in 1..=10u32 {
            for n in 1..=m {
                for f in basis_morphisms(m, n) {
                    assert!(
                        (0..=n).any(|d| !realize_morphism(&f, d).is_zero()),
                        "{f:?} realizes to zero"
                    );
                }
            }
        }
    }

    #[test]
    fn mahowald_exactness() {
        for k in 1..=8u32 {
            let n = 2 * k - 1;
            let surj = mahowald_surjection(n + 1).unwrap();
            for d in 0..=n + 1 {
                let inc = mahowald_inclusion(n, d);
                let pr = realize_morphism(&surj, d);
                let dim_sub = if d == 0 { 0 } else { realize_slice(n, d - 1).len() };
                let dim_mid = realize_slice(n + 1, d).len();
                let dim_quot = realize_slice(k, d).len();
                assert_eq!(dim_mid, dim_sub + dim_quot, "n={n} d={d}");
                assert_eq!(inc.rank(), dim_sub);
                assert_eq!(pr.rank(), dim_quot);
                assert!(inc.mul(&pr).is_zero());
            }
        }
    }

    #[test]
    fn odd_mahowald_sequences_are_isomorphisms() {
        for n in (2..=14u32).step_by(2) {
            for d in 0..=n + 1 {
                let inc = mahowald_inclusion(n, d);
                assert_eq!(inc.num_rows(), inc.num_cols(), "n={n} d={d}");
                assert_eq!(inc.rank(), inc.num_rows());
            }
        }
    }
}
