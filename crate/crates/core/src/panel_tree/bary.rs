use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{gromov_product, tree_distance, TreeEnd, TreePoint, TreeVertex};
use crate::error::{Error, Result};
use crate::padic::{Matrix2, Prime, Rational};

/// Center of the tripod spanned by three distinct ends: writing
/// c₃ = αc₁ + βc₂, the class of ⟨αc₁, βc₂⟩.
pub fn tripod_center(p: Prime, c1: &TreeEnd, c2: &TreeEnd, c3: &TreeEnd) -> Result<TreeVertex> {
    if c1 == c2 || c1 == c3 || c2 == c3 {
        return Err(Error::InvalidEndSet("tripod ends must be distinct"));
    }
    let (a, b) = (c1.as_rationals(), c2.as_rationals());
    let m = Matrix2::from_rows([[a[0].clone(), b[0].clone()], [a[1].clone(), b[1].clone()]]);
    let coef = m.inverse().expect("distinct ends").mul_vec(&c3.as_rationals());
    let cols = [a.map(|x| x * &coef[0]), b.map(|x| x * &coef[1])];
    TreeVertex::from_basis(p, &Matrix2::from_columns(&cols))
}

/// F_S(ξ) = Σ over ordered pairs of distinct ends of (C|C′)_ξ.
pub fn bary_objective(ends: &[TreeEnd], xi: &TreePoint) -> Rational {
    let mut total = Rational::zero();
    for (i, c) in ends.iter().enumerate() {
        for (j, d) in ends.iter().enumerate() {
            if i != j {
                total += gromov_product(xi, c, d).expect("distinct ends");
            }
        }
    }
    total
}

fn validate_ends(ends: &[TreeEnd]) -> Result<()> {
    if ends.len() < 3 {
        return Err(Error::InvalidEndSet("need at least three ends"));
    }
    let distinct: BTreeSet<&TreeEnd> = ends.iter().collect();
    if distinct.len() != ends.len() {
        return Err(Error::InvalidEndSet("duplicate ends"));
    }
    Ok(())
}

/// Vertices of the smallest subtree containing `seeds`.
fn vertex_hull(seeds: &BTreeSet<TreeVertex>) -> BTreeSet<TreeVertex> {
    let list: Vec<&TreeVertex> = seeds.iter().collect();
    let mut hull: BTreeSet<TreeVertex> = seeds.clone();
    for (i, a) in list.iter().enumerate() {
        for b in &list[i + 1..] {
            hull.extend(a.geodesic(b));
        }
    }
    hull
}

/// Midpoint of a diameter: the unique point minimizing the maximal distance to the set.
pub fn circumcenter(points: &[TreePoint]) -> Result<TreePoint> {
    let first = points.first().ok_or(Error::EmptyMeasure)?;
    let mut best = (Rational::zero(), first, first);
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = tree_distance(a, b);
            if d > best.0 {
                best = (d, a, b);
            }
        }
    }
    let (d, a, b) = best;
    a.along(b, &(d / Rational::from_integer(2.into())))
}

/// Barycenter of n ≥ 3 distinct ends: the circumcenter of the minimum set of F_S.
///
/// F_S is affine on each edge and grows away from the hull of the tripod
/// centers, so its minimum set is spanned by hull vertices.
pub fn bary_ends(p: Prime, ends: &[TreeEnd]) -> Result<TreePoint> {
    validate_ends(ends)?;
    let mut centers = BTreeSet::new();
    for i in 0..ends.len() {
        for j in i + 1..ends.len() {
            for k in j + 1..ends.len() {
                centers.insert(tripod_center(p, &ends[i], &ends[j], &ends[k])?);
            }
        }
    }
    let hull = vertex_hull(&centers);
    let values: Vec<(Rational, TreeVertex)> = hull
        .into_iter()
        .map(|v| (bary_objective(ends, &TreePoint::vertex(v.clone())), v))
        .collect();
    let min = values.iter().map(|(f, _)| f).min().expect("nonempty hull").clone();
    let argmin: Vec<TreePoint> = values
        .into_iter()
        .filter(|(f, _)| *f == min)
        .map(|(_, v)| TreePoint::vertex(v))
        .collect();
    circumcenter(&argmin)
}

/// R_{ξ,ε}: the least radius whose closed ball around ξ has mass > 1 − ε.
fn concentration_radius(atoms: &[(TreePoint, Rational)], xi: &TreePoint, threshold: &Rational) -> Rational {
    let mut by_dist: Vec<(Rational, &Rational)> = atoms.iter().map(|(a, w)| (tree_distance(xi, a), w)).collect();
    by_dist.sort();
    let mut mass = Rational::zero();
    for (d, w) in by_dist {
        mass += w;
        if &mass > threshold {
            return d;
        }
    }
    unreachable!("total mass exceeds 1 − ε")
}

fn merge_atoms<K: Ord + Clone>(nu: &[(K, Rational)]) -> Result<Vec<(K, Rational)>> {
    if nu.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let mut merged: BTreeMap<K, Rational> = BTreeMap::new();
    for (k, w) in nu {
        if !w.is_positive() {
            return Err(Error::InvalidArgument("atom weights must be positive".into()));
        }
        *merged.entry(k.clone()).or_insert_with(Rational::zero) += w;
    }
    let total: Rational = merged.values().sum();
    if !total.is_one() {
        return Err(Error::InvalidArgument("measure does not have total mass 1".into()));
    }
    Ok(merged.into_iter().collect())
}

/// The ε-concentration barycenter β_ε(ν) of a finitely supported probability
/// measure: the circumcenter of the closure of {ξ : R_{ξ,ε} < R_ε + 1},
/// searched over the convex hull of the support with closed balls.
///
/// Every distance to an atom is piecewise affine with slopes ±1 and kinks on
/// the grid of mesh 1/(2L), L the common denominator of the atoms' edge
/// offsets, so the search over that grid is exact.
pub fn beta_eps(nu: &[(TreePoint, Rational)], eps: &Rational) -> Result<TreePoint> {
    let half = Rational::new(1.into(), 2.into());
    if !eps.is_positive() || eps >= &half {
        return Err(Error::InvalidEpsilon);
    }
    let atoms = merge_atoms(nu)?;
    let threshold = Rational::one() - eps;
    let support: Vec<&TreePoint> = atoms.iter().map(|(a, _)| a).collect();

    let endpoints: BTreeSet<TreeVertex> = support
        .iter()
        .flat_map(|a| [a.anchor().clone(), a.toward().clone()])
        .collect();
    let hull = vertex_hull(&endpoints);
    let l = support.iter().fold(BigInt::one(), |l, a| l.lcm(a.offset().denom()));
    let steps: BigInt = 2 * l;
    let mesh = Rational::new(BigInt::one(), steps.clone());

    let in_hull = |x: &TreePoint| {
        support.iter().any(|a| {
            support
                .iter()
                .any(|b| tree_distance(a, x) + tree_distance(x, b) == tree_distance(a, b))
        })
    };

    // grid points along each hull edge, with adjacency along the edge
    let mut grid: Vec<TreePoint> = Vec::new();
    let mut index: BTreeMap<TreePoint, usize> = BTreeMap::new();
    let mut links: Vec<(usize, usize)> = Vec::new();
    let mut intern = |pt: TreePoint, grid: &mut Vec<TreePoint>| -> Option<usize> {
        if !in_hull(&pt) {
            return None;
        }
        Some(*index.entry(pt.clone()).or_insert_with(|| {
            grid.push(pt);
            grid.len() - 1
        }))
    };
    let hull_list: Vec<&TreeVertex> = hull.iter().collect();
    for v in &hull_list {
        intern(TreePoint::vertex((*v).clone()), &mut grid);
    }
    for (i, x) in hull_list.iter().enumerate() {
        for y in &hull_list[i + 1..] {
            if x.distance(y) != 1 {
                continue;
            }
            let mut prev = intern(TreePoint::vertex((*x).clone()), &mut grid);
            let mut k = BigInt::one();
            while k <= steps {
                let s = Rational::from_integer(k.clone()) * &mesh;
                let cur = intern(TreePoint::on_edge(x, y, s)?, &mut grid);
                if let (Some(a), Some(b)) = (prev, cur) {
                    links.push((a, b));
                }
                prev = cur;
                k += 1;
            }
        }
    }

    let radii: Vec<Rational> = grid
        .iter()
        .map(|x| concentration_radius(&atoms, x, &threshold))
        .collect();
    let level = radii.iter().min().expect("support lies in the hull").clone() + Rational::one();
    let mut keep: Vec<bool> = radii.iter().map(|r| r < &level).collect();
    for &(a, b) in &links {
        if radii[a] == level && radii[b] < level {
            keep[a] = true;
        }
        if radii[b] == level && radii[a] < level {
            keep[b] = true;
        }
    }
    let chosen: Vec<TreePoint> = grid
        .into_iter()
        .zip(keep)
        .filter_map(|(x, k)| k.then_some(x))
        .collect();
    circumcenter(&chosen)
}

/// Push ν⊗ν⊗ν, restricted to pairwise-distinct triples and renormalized,
/// through the barycenter map.
pub fn measure_pushforward(p: Prime, nu: &[(TreeEnd, Rational)]) -> Result<Vec<(TreePoint, Rational)>> {
    let atoms = merge_atoms(nu)?;
    if atoms.len() < 3 {
        return Err(Error::TooFewAtoms);
    }
    let mut out: BTreeMap<TreePoint, Rational> = BTreeMap::new();
    let mut total = Rational::zero();
    for (i, (a, wa)) in atoms.iter().enumerate() {
        for (j, (b, wb)) in atoms.iter().enumerate() {
            for (k, (c, wc)) in atoms.iter().enumerate() {
                if i == j || j == k || i == k {
                    continue;
                }
                let w = wa * wb * wc;
                total += &w;
                let center = TreePoint::vertex(tripod_center(p, a, b, c)?);
                *out.entry(center).or_insert_with(Rational::zero) += w;
            }
        }
    }
    Ok(out.into_iter().map(|(x, w)| (x, w / &total)).collect())
}
