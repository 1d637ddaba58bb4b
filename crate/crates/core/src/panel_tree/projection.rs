use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{TreeEnd, TreeVertex};
use crate::building::{cross, primitivize, BuildingVertex, Flag, IntVec};
use crate::error::{Error, Result};
use crate::padic::{int_valuation, Matrix2, Matrix3, Prime, Rational};

fn to_rat(v: &IntVec) -> [Rational; 3] {
    v.clone().map(Rational::from_integer)
}

fn integral(v: &[Rational; 3]) -> IntVec {
    let l = v
        .iter()
        .fold(BigInt::one(), |l, x| num_integer::Integer::lcm(&l, x.denom()));
    let l = Rational::from_integer(l);
    std::array::from_fn(|i| (&v[i] * &l).to_integer())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Line,
    Plane,
}

/// The panel tree at a vertex at infinity: a line u (type 1) or a plane
/// with normal n (type 2). Plane trees are built on the dual space, where
/// the plane becomes the line ⟨n⟩.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanelTree {
    prime: Prime,
    kind: Kind,
    apex: IntVec,
    basis: Matrix3,
    basis_inv: Matrix3,
}

impl PanelTree {
    pub fn at_line(prime: Prime, u: &IntVec) -> Result<Self> {
        Self::build(prime, Kind::Line, u)
    }

    pub fn at_plane(prime: Prime, normal: &IntVec) -> Result<Self> {
        Self::build(prime, Kind::Plane, normal)
    }

    fn build(prime: Prime, kind: Kind, v: &IntVec) -> Result<Self> {
        if v.iter().all(Zero::is_zero) {
            return Err(Error::InvalidArgument("zero apex".into()));
        }
        let apex = primitivize(v.clone());
        let i = apex
            .iter()
            .position(|x| int_valuation(prime, x) == Some(0))
            .expect("primitive");
        let mut cols = vec![to_rat(&apex)];
        for j in (0..3).filter(|&j| j != i) {
            cols.push(std::array::from_fn(|r| if r == j { Rational::one() } else { Rational::zero() }));
        }
        let basis = Matrix3::from_columns(&[cols[0].clone(), cols[1].clone(), cols[2].clone()]);
        let basis_inv = basis.inverse().expect("unit pivot");
        Ok(PanelTree {
            prime,
            kind,
            apex,
            basis,
            basis_inv,
        })
    }

    pub fn apex(&self) -> &IntVec {
        &self.apex
    }

    pub fn is_line_tree(&self) -> bool {
        self.kind == Kind::Line
    }

    fn quotient(&self, v: &[Rational; 3]) -> [Rational; 2] {
        let c = self.basis_inv.mul_vec(v);
        [c[1].clone(), c[2].clone()]
    }

    /// The image of the class of a lattice (or of its dual, for plane trees).
    pub fn project(&self, x: &BuildingVertex) -> TreeVertex {
        let m = match self.kind {
            Kind::Line => x.basis().clone(),
            Kind::Plane => x.basis().inverse().expect("canonical basis").transpose(),
        };
        let gens: Vec<[Rational; 2]> = m.columns().iter().map(|c| self.quotient(c)).collect();
        TreeVertex::from_generators(self.prime, &gens).expect("full-rank image")
    }

    /// The projection of the base vertex o.
    pub fn base(&self) -> TreeVertex {
        TreeVertex::base(self.prime)
    }

    fn in_residue(&self, c: &Flag) -> bool {
        let own = match self.kind {
            Kind::Line => c.line(),
            Kind::Plane => c.plane(),
        };
        cross(own, &self.apex).iter().all(Zero::is_zero)
    }

    /// φ(C): the end of the tree corresponding to a chamber containing the apex.
    pub fn chamber_end(&self, c: &Flag) -> Result<TreeEnd> {
        if !self.in_residue(c) {
            return Err(Error::NotInResidue);
        }
        // vectors spanning the other component of the flag
        let other = match self.kind {
            Kind::Line => c.plane(),
            Kind::Plane => c.line(),
        };
        (0..3)
            .map(|t| {
                let mut e: IntVec = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
                e[t] = BigInt::one();
                self.quotient(&to_rat(&cross(other, &e)))
            })
            .find(|q| !(q[0].is_zero() && q[1].is_zero()))
            .map(|q| TreeEnd::from_rationals(&q))
            .expect("the flag's plane is not the apex line")
    }

    /// φ⁻¹: the unique chamber containing the apex that maps to `end`.
    pub fn end_chamber(&self, end: &TreeEnd) -> Flag {
        let r = end.as_rationals();
        let w = integral(&self.basis.mul_vec(&[Rational::zero(), r[0].clone(), r[1].clone()]));
        let x = cross(&self.apex, &w);
        match self.kind {
            Kind::Line => Flag::new(self.apex.clone(), x),
            Kind::Plane => Flag::new(x, self.apex.clone()),
        }
        .expect("independent vectors")
    }

    /// The map V/⟨apex⟩ → V/⟨g·apex⟩ induced by g, in the two trees' coordinates.
    ///
    /// Fails unless g carries this tree's apex to `target`'s.
    pub fn transport(&self, g: &Matrix3, target: &PanelTree) -> Result<Matrix2> {
        if self.kind != target.kind {
            return Err(Error::InvalidArgument("panel trees of different types".into()));
        }
        let h = match self.kind {
            Kind::Line => g.clone(),
            Kind::Plane => g.inverse().ok_or(Error::SingularMatrix)?.transpose(),
        };
        let m = &(&target.basis_inv * &h) * &self.basis;
        if !(m[(1, 0)].is_zero() && m[(2, 0)].is_zero()) {
            return Err(Error::InvalidArgument("matrix does not carry the apex to the target apex".into()));
        }
        Ok(Matrix2::from_rows([
            [m[(1, 1)].clone(), m[(1, 2)].clone()],
            [m[(2, 1)].clone(), m[(2, 2)].clone()],
        ]))
    }

    /// The panel tree at g·apex.
    pub fn translate(&self, g: &Matrix3) -> Result<PanelTree> {
        let a = to_rat(&self.apex);
        let image = match self.kind {
            Kind::Line => g.mul_vec(&a),
            Kind::Plane => g.inverse().ok_or(Error::SingularMatrix)?.vec_mul(&a),
        };
        Self::build(self.prime, self.kind, &integral(&image))
    }
}

/// π_u(x) for the panel tree at the line u.
pub fn project_to_tree(prime: Prime, u: &IntVec, x: &BuildingVertex) -> Result<TreeVertex> {
    Ok(PanelTree::at_line(prime, u)?.project(x))
}

/// φ_u(C) for the panel tree at the line u.
pub fn chamber_end_bijection(prime: Prime, u: &IntVec, c: &Flag) -> Result<TreeEnd> {
    PanelTree::at_line(prime, u)?.chamber_end(c)
}
