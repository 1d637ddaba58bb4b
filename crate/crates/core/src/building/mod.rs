//! The Bruhat–Tits building of SL₃(ℚ_p) in its lattice model.
//!
//! A vertex is the homothety class of a ℤ₍ₚ₎-lattice in ℚ³, stored as the
//! canonical Hermite basis of that class; two vertices are equal exactly when
//! their canonical bases are. The base vertex `o` is the class of ℤ³.

mod flag;
mod sector;

pub use flag::{cartan_flag, flag_distance, flag_mod_p, weyl_distance, Flag, FlagCell, FlagDistance, GermChamber};
pub(crate) use flag::{cross, primitivize, IntVec};
pub use sector::{adapted_basis, germ_project, retraction_coordinate, sector_membership};

use num_traits::One;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::{format_rational, hermite_canonical, smith_decompose, Matrix3, Prime, Rational};
use crate::weyl::{dominance_project, TypeVector};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BuildingVertex {
    prime: Prime,
    canon: Matrix3,
}

impl BuildingVertex {
    /// The class of the standard lattice ℤ³.
    pub fn standard(prime: Prime) -> Self {
        BuildingVertex {
            prime,
            canon: Matrix3::identity(),
        }
    }

    /// Vertex spanned by the columns of an invertible rational matrix.
    pub fn from_basis(prime: Prime, basis: &Matrix3) -> Result<Self> {
        Ok(BuildingVertex {
            prime,
            canon: hermite_canonical(prime, basis)?,
        })
    }

    /// The canonical basis: integral, primitive, upper triangular.
    pub fn basis(&self) -> &Matrix3 {
        &self.canon
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }
}

impl Serialize for BuildingVertex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            basis: Vec<Vec<String>>,
        }
        Repr {
            basis: self
                .canon
                .rows()
                .iter()
                .map(|r| r.iter().map(format_rational).collect())
                .collect(),
        }
        .serialize(s)
    }
}

/// The isometric action of SL₃(ℚ) on vertices.
pub fn act(g: &Matrix3, x: &BuildingVertex) -> Result<BuildingVertex> {
    if !g.det().is_one() {
        return Err(Error::NotInGroup);
    }
    BuildingVertex::from_basis(x.prime, &(g * &x.canon))
}

/// Basis change taking x's canonical basis to y's: the columns of y in x's coordinates.
pub fn relative_matrix(x: &BuildingVertex, y: &BuildingVertex) -> Matrix3 {
    let inv = x.canon.inverse().expect("canonical bases are invertible");
    &inv * &y.canon
}

/// Cartan type θ(x, y).
///
/// Convention: θ is the dominance-sorted negation of the Smith valuations of
/// the relative basis change, shifted to sum zero, so that
/// θ(o, diag(1/p, 1, p)·o) = (1, 0, −1).
pub fn cartan_type(x: &BuildingVertex, y: &BuildingVertex) -> TypeVector {
    let s = smith_decompose(x.prime, &relative_matrix(x, y)).expect("invertible relative matrix");
    type_from_valuations(s.valuations)
}

/// Sum-zero, dominance-sorted negation of elementary-divisor valuations.
pub fn type_from_valuations(v: [i64; 3]) -> TypeVector {
    let mean = Rational::new((v[0] + v[1] + v[2]).into(), 3.into());
    let shifted = v.map(|x| &mean - Rational::from_integer(x.into()));
    dominance_project(&shifted).expect("shifted valuations sum to zero").0
}

/// d(x, y)², exact.
pub fn distance_sq(x: &BuildingVertex, y: &BuildingVertex) -> Rational {
    cartan_type(x, y).norm_sq()
}
