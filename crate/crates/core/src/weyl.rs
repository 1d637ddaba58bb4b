//! Geometry of the A₂ model apartment.
//!
//! Points of the apartment are sum-zero triples; one lattice step is one unit
//! of valuation, and the metric is the Euclidean norm on triples. Squared
//! norms are exact rationals, so comparisons are done on them.

use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::{format_rational, rational_to_f64, Rational};

/// A point of the closed dominant cone: λ₁ ≥ λ₂ ≥ λ₃, λ₁ + λ₂ + λ₃ = 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeVector {
    coords: [Rational; 3],
}

/// Element of the Weyl group S₃, acting by w(e_i) = e_{perm[i]}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeylElement {
    perm: [u8; 3],
}

impl WeylElement {
    pub const IDENTITY: WeylElement = WeylElement { perm: [0, 1, 2] };
    /// Longest element, full reversal.
    pub const LONGEST: WeylElement = WeylElement { perm: [2, 1, 0] };
    /// Swaps slots 1 and 2.
    pub const S1: WeylElement = WeylElement { perm: [1, 0, 2] };
    /// Swaps slots 2 and 3.
    pub const S2: WeylElement = WeylElement { perm: [0, 2, 1] };

    pub fn new(perm: [u8; 3]) -> Option<Self> {
        let mut seen = [false; 3];
        for &i in &perm {
            if i > 2 || seen[i as usize] {
                return None;
            }
            seen[i as usize] = true;
        }
        Some(WeylElement { perm })
    }

    pub fn all() -> [WeylElement; 6] {
        [[0, 1, 2], [1, 0, 2], [0, 2, 1], [1, 2, 0], [2, 0, 1], [2, 1, 0]].map(|perm| WeylElement { perm })
    }

    pub fn perm(self) -> [u8; 3] {
        self.perm
    }

    /// (self ∘ other)(i) = self(other(i)).
    pub fn compose(self, other: WeylElement) -> WeylElement {
        WeylElement {
            perm: other.perm.map(|i| self.perm[i as usize]),
        }
    }

    pub fn inverse(self) -> WeylElement {
        let mut perm = [0u8; 3];
        for (i, &j) in self.perm.iter().enumerate() {
            perm[j as usize] = i as u8;
        }
        WeylElement { perm }
    }

    /// Coxeter length = number of inversions; the gallery distance in the spherical apartment.
    pub fn length(self) -> u8 {
        let p = self.perm;
        (0..3)
            .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i] > p[j])
            .count() as u8
    }

    pub fn apply<T: Clone>(self, v: &[T; 3]) -> [T; 3] {
        let mut out = v.clone();
        for i in 0..3 {
            out[self.perm[i] as usize] = v[i].clone();
        }
        out
    }
}

impl TypeVector {
    /// Builds a type vector, checking dominance and the zero-sum normalization.
    pub fn new(coords: [Rational; 3]) -> Result<Self> {
        if !(&coords[0] + &coords[1] + &coords[2]).is_zero() {
            return Err(Error::InvalidVector);
        }
        if coords[0] < coords[1] || coords[1] < coords[2] {
            return Err(Error::InvalidArgument("type vector is not dominant".into()));
        }
        Ok(TypeVector { coords })
    }

    pub fn from_ints(c: [i64; 3]) -> Result<Self> {
        Self::new(c.map(|x| Rational::from_integer(x.into())))
    }

    pub fn zero() -> Self {
        TypeVector {
            coords: std::array::from_fn(|_| Rational::zero()),
        }
    }

    pub fn coords(&self) -> &[Rational; 3] {
        &self.coords
    }

    /// ‖λ‖², exact.
    pub fn norm_sq(&self) -> Rational {
        norm_sq(&self.coords)
    }

    pub fn norm(&self) -> f64 {
        rational_to_f64(&self.norm_sq()).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Positive rescaling stays dominant.
    pub fn scale(&self, c: &Rational) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        Ok(TypeVector {
            coords: std::array::from_fn(|i| &self.coords[i] * c),
        })
    }

    pub fn to_f64(&self) -> [f64; 3] {
        std::array::from_fn(|i| rational_to_f64(&self.coords[i]))
    }
}

impl Serialize for TypeVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.iter().map(format_rational).collect::<Vec<_>>().serialize(s)
    }
}

pub fn norm_sq(v: &[Rational; 3]) -> Rational {
    v.iter().fold(Rational::zero(), |acc, x| acc + x * x)
}

fn diff(a: &[Rational; 3], b: &[Rational; 3]) -> [Rational; 3] {
    std::array::from_fn(|i| &a[i] - &b[i])
}

/// Sorts a sum-zero triple into the dominant cone. Also returns the Weyl
/// element `w` with `w·v` dominant.
pub fn dominance_project(v: &[Rational; 3]) -> Result<(TypeVector, WeylElement)> {
    if !(&v[0] + &v[1] + &v[2]).is_zero() {
        return Err(Error::InvalidVector);
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| v[b].cmp(&v[a]));
    let mut perm = [0u8; 3];
    for (k, &i) in idx.iter().enumerate() {
        perm[i] = k as u8;
    }
    let w = WeylElement { perm };
    Ok((TypeVector { coords: w.apply(v) }, w))
}

/// Simple-root pairings (λ₁−λ₂, λ₂−λ₃) and whether both are positive.
pub fn root_pairings(lambda: &TypeVector) -> (Rational, Rational, bool) {
    let c = &lambda.coords;
    let a1 = &c[0] - &c[1];
    let a2 = &c[1] - &c[2];
    let regular = a1.is_positive() && a2.is_positive();
    (a1, a2, regular)
}

/// ι(λ) = w₀(−λ).
pub fn opposition_involution(lambda: &TypeVector) -> TypeVector {
    let c = &lambda.coords;
    TypeVector {
        coords: [-&c[2], -&c[1], -&c[0]],
    }
}

/// Which closed-form constant [`separation_constant`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeparationFormula {
    /// min ‖λ − wλ‖ / ‖λ‖ = 2 sin(∠(λ, wλ)/2).
    #[default]
    Chord,
    /// min 2 sin(∠(λ, wλ)), as displayed in the literature; kept for comparison.
    LiteralSine,
}

/// Separation constant of a direction: how far apart two segments of type λ
/// issuing from a common point must end when they only share that point.
pub fn separation_constant(lambda: &TypeVector, formula: SeparationFormula) -> Result<f64> {
    if lambda.is_zero() {
        return Err(Error::ZeroVector);
    }
    let n2 = lambda.norm_sq();
    let others = WeylElement::all()
        .into_iter()
        .filter(|w| *w != WeylElement::IDENTITY)
        .map(|w| w.apply(&lambda.coords));
    let value = match formula {
        SeparationFormula::Chord => others
            .map(|wl| norm_sq(&diff(&lambda.coords, &wl)) / &n2)
            .min()
            .map(|r| rational_to_f64(&r).sqrt()),
        SeparationFormula::LiteralSine => others
            .map(|wl| {
                let dot = lambda.coords.iter().zip(&wl).fold(Rational::zero(), |a, (x, y)| a + x * y);
                let cos = rational_to_f64(&(dot / &n2)).clamp(-1.0, 1.0);
                2.0 * cos.acos().sin()
            })
            .min_by(f64::total_cmp),
    };
    Ok(value.expect("five nontrivial Weyl elements"))
}

/// Finite-n profile of how close a sequence of types is to a ray of fixed direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub lambda_hat: TypeVector,
    pub max_step_ratio: f64,
    pub direction_residuals: Vec<f64>,
}

/// `types[n-1]` is the type of the n-th point; `steps[n-1]` the n-th step length.
pub fn regularity_diagnostics(types: &[TypeVector], steps: &[f64]) -> Result<RegularityReport> {
    let big_n = types.len();
    if big_n == 0 {
        return Err(Error::EmptyTrajectory);
    }
    let per_step = |n: usize| Rational::new(1.into(), (n as i64).into());
    let lambda_hat = types[big_n - 1].scale(&per_step(big_n))?;
    let direction_residuals = types
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let s = per_step(i + 1);
            let d: [Rational; 3] = std::array::from_fn(|k| &t.coords[k] * &s - &lambda_hat.coords[k]);
            rational_to_f64(&norm_sq(&d)).sqrt()
        })
        .collect();
    let half = steps.len() / 2;
    let max_step_ratio = steps
        .iter()
        .enumerate()
        .skip(half)
        .map(|(i, s)| s / (i + 1) as f64)
        .fold(0.0, f64::max);
    Ok(RegularityReport {
        lambda_hat,
        max_step_ratio,
        direction_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tv(c: [i64; 3]) -> TypeVector {
        TypeVector::from_ints(c).unwrap()
    }

    fn q(x: i64) -> Rational {
        Rational::from_integer(x.into())
    }

    #[test]
    fn dominance_examples() {
        assert_eq!(dominance_project(&[q(0), q(0), q(0)]).unwrap().0, tv([0, 0, 0]));
        assert_eq!(dominance_project(&[q(-1), q(0), q(1)]).unwrap().0, tv([1, 0, -1]));
        assert_eq!(dominance_project(&[q(1), q(-2), q(1)]).unwrap().0, tv([1, 1, -2]));
        assert!(matches!(dominance_project(&[q(1), q(0), q(0)]), Err(Error::InvalidVector)));
    }

    #[test]
    fn projection_records_permutation() {
        let v = [q(-1), q(3), q(-2)];
        let (t, w) = dominance_project(&v).unwrap();
        assert_eq!(w.apply(&v), *t.coords());
    }

    #[test]
    fn pairings() {
        assert_eq!(root_pairings(&tv([1, 0, -1])), (q(1), q(1), true));
        assert_eq!(root_pairings(&tv([1, 1, -2])), (q(0), q(3), false));
        assert_eq!(root_pairings(&tv([0, 0, 0])), (q(0), q(0), false));
    }

    #[test]
    fn opposition_examples() {
        assert_eq!(opposition_involution(&tv([1, 0, -1])), tv([1, 0, -1]));
        assert_eq!(opposition_involution(&tv([2, -1, -1])), tv([1, 1, -2]));
        assert_eq!(opposition_involution(&tv([0, 0, 0])), tv([0, 0, 0]));
    }

    #[test]
    fn opposition_matches_longest_element_on_negation() {
        // brute force over S3: ι(λ) is the unique dominant element of the orbit of −λ
        let l = tv([5, 1, -6]);
        let neg = l.coords().clone().map(|x| -x);
        let dominant: Vec<_> = WeylElement::all()
            .into_iter()
            .map(|w| w.apply(&neg))
            .filter(|c| c[0] >= c[1] && c[1] >= c[2])
            .collect();
        assert_eq!(dominant.len(), 1);
        assert_eq!(opposition_involution(&l).coords(), &dominant[0]);
    }

    #[test]
    fn separation_examples() {
        let c = |c| separation_constant(&tv(c), SeparationFormula::Chord).unwrap();
        assert!((c([1, 0, -1]) - 1.0).abs() < 1e-12);
        assert_eq!(c([1, 1, -2]), 0.0);
        assert!((c([2, 0, -2]) - 1.0).abs() < 1e-12);
        assert!(matches!(
            separation_constant(&TypeVector::zero(), SeparationFormula::Chord),
            Err(Error::ZeroVector)
        ));
        // the literal formula collapses at the antipodal element w₀
        let lit = separation_constant(&tv([1, 0, -1]), SeparationFormula::LiteralSine).unwrap();
        assert!(lit.abs() < 1e-12);
    }

    #[test]
    fn weyl_group_axioms() {
        for a in WeylElement::all() {
            assert_eq!(a.compose(a.inverse()), WeylElement::IDENTITY);
            for b in WeylElement::all() {
                for c in WeylElement::all() {
                    assert_eq!(a.compose(b).compose(c), a.compose(b.compose(c)));
                }
            }
        }
        assert_eq!(WeylElement::LONGEST.length(), 3);
        assert_eq!(WeylElement::S1.compose(WeylElement::S2).length(), 2);
        assert_eq!(WeylElement::S1.compose(WeylElement::S2.compose(WeylElement::S1)), WeylElement::LONGEST);
    }

    #[test]
    fn regularity_exact_ray() {
        let types: Vec<_> = (1..=20).map(|n| tv([n, 0, -n])).collect();
        let steps = vec![2f64.sqrt(); 20];
        let r = regularity_diagnostics(&types, &steps).unwrap();
        assert_eq!(r.lambda_hat, tv([1, 0, -1]));
        assert!(r.direction_residuals.iter().all(|&x| x == 0.0));
        assert!((r.max_step_ratio - 2f64.sqrt() / 11.0).abs() < 1e-12);
    }

    #[test]
    fn regularity_sqrt_perturbation() {
        let n_max = 4000i64;
        let types: Vec<_> = (1..=n_max)
            .map(|n| {
                let s = (n as f64).sqrt().floor() as i64;
                tv([n + s, 0, -n - s])
            })
            .collect();
        let r = regularity_diagnostics(&types, &[]).unwrap();
        // residual_n = √2 |⌊√n⌋/n − ⌊√N⌋/N| ≤ √2 / √n
        for (i, res) in r.direction_residuals.iter().enumerate() {
            let n = (i + 1) as f64;
            assert!(*res <= 2f64.sqrt() / n.sqrt() + 1e-12);
        }
        let early = r.direction_residuals[99];
        let late = r.direction_residuals[999];
        assert!(late < early);
    }

    #[test]
    fn regularity_single_point_and_empty() {
        let r = regularity_diagnostics(&[tv([2, 0, -2])], &[1.0]).unwrap();
        assert_eq!(r.lambda_hat, tv([2, 0, -2]));
        assert_eq!(r.direction_residuals, vec![0.0]);
        assert!(matches!(regularity_diagnostics(&[], &[]), Err(Error::EmptyTrajectory)));
    }

    fn arb_vector() -> impl Strategy<Value = [Rational; 3]> {
        (-20i64..20, -20i64..20, 1i64..6).prop_map(|(a, b, d)| {
            let d = Rational::from_integer(d.into());
            [q(a) / &d, q(b) / &d, q(-a - b) / &d]
        })
    }

    proptest! {
        #[test]
        fn projection_is_weyl_invariant(v in arb_vector()) {
            let (t, _) = dominance_project(&v).unwrap();
            for w in WeylElement::all() {
                prop_assert_eq!(&dominance_project(&w.apply(&v)).unwrap().0, &t);
            }
            prop_assert_eq!(dominance_project(t.coords()).unwrap().0, t);
        }

        #[test]
        fn opposition_is_isometric_involution(v in arb_vector()) {
            let (t, _) = dominance_project(&v).unwrap();
            let o = opposition_involution(&t);
            prop_assert_eq!(&opposition_involution(&o), &t);
            prop_assert_eq!(o.norm_sq(), t.norm_sq());
            prop_assert_eq!(root_pairings(&o).2, root_pairings(&t).2);
        }

        #[test]
        fn separation_is_scale_invariant_and_vanishes_on_walls(v in arb_vector(), c in 1i64..9) {
            let (t, _) = dominance_project(&v).unwrap();
            prop_assume!(!t.is_zero());
            let s = separation_constant(&t, SeparationFormula::Chord).unwrap();
            let scaled = t.scale(&q(c)).unwrap();
            let s2 = separation_constant(&scaled, SeparationFormula::Chord).unwrap();
            prop_assert!((s - s2).abs() < 1e-12);
            prop_assert_eq!(s == 0.0, !root_pairings(&t).2);
        }
    }
}
