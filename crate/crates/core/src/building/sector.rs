use num_traits::{One, Zero};

use super::flag::{cross, flag_mod_p, IntVec};
use super::{cartan_flag, cartan_type, relative_matrix, BuildingVertex, Flag, GermChamber};
use crate::error::Result;
use crate::padic::{int_valuation, iwasawa_decompose, Matrix3, Prime, Rational};

fn unit_index(p: Prime, v: &IntVec) -> usize {
    v.iter()
        .position(|x| int_valuation(p, x) == Some(0))
        .expect("primitive vector has a unit coordinate")
}

/// A basis B in GL₃(ℤ₍ₚ₎) with B·(standard flag) = F: columns u, n × e_k, e_m
/// where u_k and n_m are units.
pub fn adapted_basis(p: Prime, f: &Flag) -> Matrix3 {
    let u = f.line();
    let n = f.plane();
    let k = unit_index(p, u);
    let m = unit_index(p, n);
    let mut ek: IntVec = [0.into(), 0.into(), 0.into()];
    ek[k] = One::one();
    let v = cross(n, &ek);
    let cols = [
        u.clone().map(Rational::from_integer),
        v.map(Rational::from_integer),
        std::array::from_fn(|i| if i == m { Rational::one() } else { Rational::zero() }),
    ];
    Matrix3::from_columns(&cols)
}

/// Coordinate of y under the retraction onto the standard apartment centered
/// at x and based at the chamber C, sum-zero normalized so that points of
/// the sector Q(x, C) get their Cartan type.
pub fn retraction_coordinate(x: &BuildingVertex, c: &Flag, y: &BuildingVertex) -> [Rational; 3] {
    let p = x.prime();
    let xinv = x.basis().inverse().expect("canonical basis");
    let local = c.act(&xinv).expect("invertible");
    let b = adapted_basis(p, &local);
    let r = &b.inverse().expect("unimodular") * &relative_matrix(x, y);
    let e = iwasawa_decompose(p, &r).expect("invertible").exponents;
    let mean = Rational::new((e[0] + e[1] + e[2]).into(), 3.into());
    e.map(|v| &mean - Rational::from_integer(v.into()))
}

/// y ∈ Q(x, C).
pub fn sector_membership(x: &BuildingVertex, c: &Flag, y: &BuildingVertex) -> bool {
    &retraction_coordinate(x, c, y) == cartan_type(x, y).coords()
}

/// The germ at o of the segment [o, y], as a chamber of the residue building.
pub fn germ_project(o: &BuildingVertex, y: &BuildingVertex) -> Result<GermChamber> {
    let p = o.prime();
    let f = cartan_flag(p, &relative_matrix(o, y))?;
    Ok(flag_mod_p(p, &f))
}
