//! Panel trees: the Bruhat–Tits trees of lattice classes in the plane
//! V/⟨u⟩ attached to a vertex at infinity u, with unit edge lengths.
//!
//! Points of a tree are vertices or rational positions on edges. Ends are
//! lines in the quotient plane.

mod bary;
mod projection;

pub use bary::{bary_ends, bary_objective, beta_eps, circumcenter, measure_pushforward, tripod_center};
pub use projection::{chamber_end_bijection, project_to_tree, PanelTree};

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::{format_rational, int_valuation, lattice_canonical, smith_decompose, Matrix2, Prime, Rational};

/// A vertex of a panel tree: the class of a rank-2 lattice in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeVertex {
    prime: Prime,
    canon: Matrix2,
}

impl TreeVertex {
    /// The class of ℤ².
    pub fn base(prime: Prime) -> Self {
        TreeVertex {
            prime,
            canon: Matrix2::identity(),
        }
    }

    pub fn from_basis(prime: Prime, basis: &Matrix2) -> Result<Self> {
        if basis.det().is_zero() {
            return Err(Error::SingularMatrix);
        }
        Self::from_generators(prime, &basis.columns())
    }

    /// The class of the lattice spanned by a full-rank generating set.
    pub fn from_generators(prime: Prime, gens: &[[Rational; 2]]) -> Result<Self> {
        Ok(TreeVertex {
            prime,
            canon: lattice_canonical(prime, gens)?,
        })
    }

    pub fn basis(&self) -> &Matrix2 {
        &self.canon
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn act(&self, g: &Matrix2) -> Result<TreeVertex> {
        Self::from_basis(self.prime, &(g * &self.canon))
    }

    fn relative(&self, other: &TreeVertex) -> Matrix2 {
        &self.canon.inverse().expect("canonical basis") * &other.canon
    }

    pub fn distance(&self, other: &TreeVertex) -> u64 {
        let s = smith_decompose(self.prime, &self.relative(other)).expect("invertible");
        (s.valuations[1] - s.valuations[0]) as u64
    }

    /// The vertex k steps from `self` along the geodesic to `other`.
    pub fn step_toward(&self, other: &TreeVertex, k: u64) -> TreeVertex {
        let s = smith_decompose(self.prime, &self.relative(other)).expect("invertible");
        let d = (s.valuations[1] - s.valuations[0]) as u64;
        assert!(k <= d, "step beyond the geodesic");
        let m = &(&self.canon * &s.u) * &Matrix2::p_diagonal(self.prime, [0, k as i64]);
        TreeVertex::from_basis(self.prime, &m).expect("invertible")
    }

    /// All vertices of the geodesic from `self` to `other`, endpoints included.
    pub fn geodesic(&self, other: &TreeVertex) -> Vec<TreeVertex> {
        let d = self.distance(other);
        (0..=d).map(|k| self.step_toward(other, k)).collect()
    }

    /// The p + 1 adjacent vertices (index-p sublattices).
    pub fn neighbors(&self) -> Vec<TreeVertex> {
        let p = self.prime;
        let q = p.get() as i64;
        let mut out: Vec<TreeVertex> = (0..q)
            .map(|k| Matrix2::from_ints([[q, k], [0, 1]]))
            .chain(std::iter::once(Matrix2::from_ints([[1, 0], [0, q]])))
            .map(|m| TreeVertex::from_basis(p, &(&self.canon * &m)).expect("invertible"))
            .collect();
        out.sort();
        out
    }
}

impl Serialize for TreeVertex {
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

/// A point of a panel tree: `offset` of the way from `anchor` to the adjacent
/// vertex `toward`. Vertices have offset 0 and `toward == anchor`; edge
/// points are stored with the smaller endpoint as anchor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePoint {
    anchor: TreeVertex,
    toward: TreeVertex,
    offset: Rational,
}

impl From<TreeVertex> for TreePoint {
    fn from(v: TreeVertex) -> Self {
        TreePoint::vertex(v)
    }
}

impl TreePoint {
    pub fn vertex(v: TreeVertex) -> Self {
        TreePoint {
            toward: v.clone(),
            anchor: v,
            offset: Rational::zero(),
        }
    }

    /// The point at fraction `s` ∈ [0, 1] of the edge from x to the adjacent vertex y.
    pub fn on_edge(x: &TreeVertex, y: &TreeVertex, s: Rational) -> Result<Self> {
        if s.is_negative() || s > Rational::one() {
            return Err(Error::InvalidArgument("edge offset outside [0, 1]".into()));
        }
        if s.is_zero() {
            return Ok(TreePoint::vertex(x.clone()));
        }
        if s.is_one() {
            return Ok(TreePoint::vertex(y.clone()));
        }
        if x.distance(y) != 1 {
            return Err(Error::InvalidArgument("edge endpoints are not adjacent".into()));
        }
        Ok(match x.cmp(y) {
            Ordering::Less => TreePoint {
                anchor: x.clone(),
                toward: y.clone(),
                offset: s,
            },
            _ => TreePoint {
                anchor: y.clone(),
                toward: x.clone(),
                offset: Rational::one() - s,
            },
        })
    }

    /// The point at distance t from a along the geodesic to b.
    pub fn on_segment(a: &TreeVertex, b: &TreeVertex, t: &Rational) -> Result<Self> {
        let d = Rational::from_integer(a.distance(b).into());
        if t.is_negative() || t > &d {
            return Err(Error::InvalidArgument("position outside the segment".into()));
        }
        let k = t.floor();
        let frac = t - &k;
        let k = k.to_integer().try_into().expect("small");
        let x = a.step_toward(b, k);
        if frac.is_zero() {
            return Ok(TreePoint::vertex(x));
        }
        let y = a.step_toward(b, k + 1);
        TreePoint::on_edge(&x, &y, frac)
    }

    pub fn anchor(&self) -> &TreeVertex {
        &self.anchor
    }

    pub fn toward(&self) -> &TreeVertex {
        &self.toward
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    pub fn as_vertex(&self) -> Option<&TreeVertex> {
        self.offset.is_zero().then_some(&self.anchor)
    }

    pub fn act(&self, g: &Matrix2) -> Result<TreePoint> {
        let a = self.anchor.act(g)?;
        if self.offset.is_zero() {
            return Ok(TreePoint::vertex(a));
        }
        TreePoint::on_edge(&a, &self.toward.act(g)?, self.offset.clone())
    }

    /// Endpoint vertices with their distances from this point.
    fn ends(&self) -> [(TreeVertex, Rational); 2] {
        [
            (self.anchor.clone(), self.offset.clone()),
            (self.toward.clone(), Rational::one() - &self.offset),
        ]
    }

    fn distance_to_vertex(&self, v: &TreeVertex) -> Rational {
        if self.offset.is_zero() {
            return Rational::from_integer(self.anchor.distance(v).into());
        }
        self.ends()
            .into_iter()
            .map(|(x, s)| s + Rational::from_integer(x.distance(v).into()))
            .min()
            .expect("two ends")
    }

    /// The endpoint of this point's edge through which the geodesic to `q`
    /// leaves, with its distance from this point.
    fn exit_toward(&self, q: &TreePoint) -> (TreeVertex, Rational) {
        if self.offset.is_zero() {
            return (self.anchor.clone(), Rational::zero());
        }
        self.ends()
            .into_iter()
            .min_by_key(|(x, s)| s + q.distance_to_vertex(x))
            .expect("two ends")
    }

    fn same_edge(&self, other: &TreePoint) -> bool {
        !self.offset.is_zero() && !other.offset.is_zero() && self.anchor == other.anchor && self.toward == other.toward
    }

    /// The point at distance r from `self` along the geodesic to `other`.
    pub fn along(&self, other: &TreePoint, r: &Rational) -> Result<TreePoint> {
        let total = tree_distance(self, other);
        if r.is_negative() || r > &total {
            return Err(Error::InvalidArgument("position outside the segment".into()));
        }
        if self.same_edge(other) {
            let s = if self.offset < other.offset {
                &self.offset + r
            } else {
                &self.offset - r
            };
            return TreePoint::on_edge(&self.anchor, &self.toward, s);
        }
        let (ea, da) = self.exit_toward(other);
        let (eb, db) = other.exit_toward(self);
        let inner = Rational::from_integer(ea.distance(&eb).into());
        if r <= &da {
            // still on this point's own edge, heading to ea
            let (x, y) = (&self.anchor, &self.toward);
            let s = if &ea == y { &self.offset + r } else { &self.offset - r };
            return TreePoint::on_edge(x, y, s);
        }
        let r2 = r - &da;
        if r2 <= inner {
            return TreePoint::on_segment(&ea, &eb, &r2);
        }
        let back = &total - r;
        let (x, y) = (&other.anchor, &other.toward);
        let s = if &eb == y {
            &other.offset + back
        } else {
            &other.offset - back
        };
        debug_assert!(db >= Rational::zero());
        TreePoint::on_edge(x, y, s)
    }
}

impl Serialize for TreePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            anchor: &'a TreeVertex,
            toward: &'a TreeVertex,
            offset: String,
        }
        Repr {
            anchor: &self.anchor,
            toward: &self.toward,
            offset: format_rational(&self.offset),
        }
        .serialize(s)
    }
}

/// Tree metric with unit edges, extended linearly along edges.
pub fn tree_distance(a: &TreePoint, b: &TreePoint) -> Rational {
    if a.same_edge(b) {
        return (&a.offset - &b.offset).abs();
    }
    if b.offset.is_zero() {
        return a.distance_to_vertex(&b.anchor);
    }
    b.ends()
        .into_iter()
        .map(|(x, s)| s + a.distance_to_vertex(&x))
        .min()
        .expect("two ends")
}

/// An end of a panel tree: a line in the quotient plane, held as a primitive
/// integer vector with first nonzero entry positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeEnd {
    rep: [BigInt; 2],
}

impl TreeEnd {
    pub fn new(v: [BigInt; 2]) -> Result<Self> {
        let g = v[0].gcd(&v[1]);
        if g.is_zero() {
            return Err(Error::InvalidArgument("zero end representative".into()));
        }
        let g = if v[0].is_negative() || (v[0].is_zero() && v[1].is_negative()) {
            -g
        } else {
            g
        };
        Ok(TreeEnd { rep: v.map(|x| x / &g) })
    }

    pub fn from_ints(v: [i64; 2]) -> Result<Self> {
        TreeEnd::new(v.map(BigInt::from))
    }

    pub fn from_rationals(v: &[Rational; 2]) -> Result<Self> {
        let l = v[0].denom().lcm(v[1].denom());
        let l = Rational::from_integer(l);
        TreeEnd::new(std::array::from_fn(|i| (&v[i] * &l).to_integer()))
    }

    pub fn rep(&self) -> &[BigInt; 2] {
        &self.rep
    }

    pub fn as_rationals(&self) -> [Rational; 2] {
        self.rep.clone().map(Rational::from_integer)
    }

    pub fn act(&self, g: &Matrix2) -> Result<TreeEnd> {
        TreeEnd::from_rationals(&g.mul_vec(&self.as_rationals()))
    }
}

impl Serialize for TreeEnd {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rep.clone().map(|x| x.to_string()).serialize(s)
    }
}

/// (C|D) at a vertex; `None` when C = D.
fn gromov_at_vertex(x: &TreeVertex, c: &TreeEnd, d: &TreeEnd) -> Option<u64> {
    let inv = x.canon.inverse().expect("canonical basis");
    let c = TreeEnd::from_rationals(&inv.mul_vec(&c.as_rationals())).expect("nonzero");
    let d = TreeEnd::from_rationals(&inv.mul_vec(&d.as_rationals())).expect("nonzero");
    let det = &c.rep[0] * &d.rep[1] - &c.rep[1] * &d.rep[0];
    int_valuation(x.prime, &det)
}

/// Gromov product (C|D)_ξ: the distance from ξ to the geodesic line joining
/// C and D; `None` stands for +∞ (C = D).
pub fn gromov_product(xi: &TreePoint, c: &TreeEnd, d: &TreeEnd) -> Option<Rational> {
    let ha = gromov_at_vertex(&xi.anchor, c, d)?;
    if xi.offset.is_zero() {
        return Some(Rational::from_integer(ha.into()));
    }
    let hb = gromov_at_vertex(&xi.toward, c, d)?;
    let (ha, hb) = (Rational::from_integer(ha.into()), Rational::from_integer(hb.into()));
    if ha == hb {
        // the whole edge lies on the line
        return Some(ha);
    }
    Some((&ha + &xi.offset).min(hb + Rational::one() - &xi.offset))
}

/// d_ξ(C, D) = exp(−(C|D)_ξ).
pub fn end_metric(xi: &TreePoint, c: &TreeEnd, d: &TreeEnd) -> f64 {
    match gromov_product(xi, c, d) {
        None => 0.0,
        Some(h) => (-crate::padic::rational_to_f64(&h)).exp(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn vertex_distances() {
        let p = p3();
        let o = TreeVertex::base(p);
        assert_eq!(o.distance(&o), 0);
        let a = TreeVertex::from_basis(p, &Matrix2::p_diagonal(p, [0, 1])).unwrap();
        assert_eq!(o.distance(&a), 1);
        let h = TreeVertex::from_basis(p, &Matrix2::p_diagonal(p, [1, 1])).unwrap();
        assert_eq!(h, o);
    }

    #[test]
    fn neighbors_are_adjacent_and_distinct() {
        let p = p3();
        let o = TreeVertex::base(p);
        let n = o.neighbors();
        assert_eq!(n.len(), 4);
        for (i, a) in n.iter().enumerate() {
            assert_eq!(o.distance(a), 1);
            for b in &n[i + 1..] {
                assert_eq!(a.distance(b), 2);
            }
        }
    }

    #[test]
    fn geodesics() {
        let p = p3();
        let o = TreeVertex::base(p);
        let far = TreeVertex::from_basis(p, &Matrix2::from_ints([[27, 5], [0, 1]])).unwrap();
        let path = o.geodesic(&far);
        assert_eq!(path.len(), 4);
        for w in path.windows(2) {
            assert_eq!(w[0].distance(&w[1]), 1);
        }
        assert_eq!(path[3], far);
    }

    #[test]
    fn edge_points() {
        let p = p3();
        let o = TreeVertex::base(p);
        let far = TreeVertex::from_basis(p, &Matrix2::p_diagonal(p, [0, 2])).unwrap();
        let mid = TreePoint::on_segment(&o, &far, &q(1, 1)).unwrap();
        assert!(mid.as_vertex().is_some());
        let a = TreePoint::on_segment(&o, &far, &q(1, 2)).unwrap();
        let b = TreePoint::on_segment(&far, &o, &q(3, 2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(tree_distance(&a, &TreePoint::vertex(far.clone())), q(3, 2));
        let c = TreePoint::on_segment(&o, &far, &q(7, 4)).unwrap();
        assert_eq!(tree_distance(&a, &c), q(5, 4));
        assert_eq!(a.along(&c, &q(1, 2)).unwrap(), mid);
        assert_eq!(c.along(&a, &q(5, 4)).unwrap(), a);
    }

    #[test]
    fn gromov_examples() {
        let p = p3();
        let o = TreePoint::vertex(TreeVertex::base(p));
        let e1 = TreeEnd::from_ints([1, 0]).unwrap();
        let e2 = TreeEnd::from_ints([0, 1]).unwrap();
        let e3 = TreeEnd::from_ints([1, 3]).unwrap();
        assert_eq!(gromov_product(&o, &e1, &e2), Some(q(0, 1)));
        assert_eq!(end_metric(&o, &e1, &e2), 1.0);
        assert_eq!(gromov_product(&o, &e1, &e3), Some(q(1, 1)));
        assert!((end_metric(&o, &e1, &e3) - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(end_metric(&o, &e1, &e1), 0.0);
    }

    #[test]
    fn ends_are_projective() {
        assert_eq!(TreeEnd::from_ints([-2, 4]).unwrap(), TreeEnd::from_ints([1, -2]).unwrap());
        assert!(TreeEnd::from_ints([0, 0]).is_err());
    }
}
