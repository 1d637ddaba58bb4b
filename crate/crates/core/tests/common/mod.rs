#![allow(dead_code)]

use btwalk::padic::{Matrix3, Prime, Rational};
use btwalk::random_walk::MeasureSpec;
use num_traits::One;

pub fn p3() -> Prime {
    Prime::new(3).unwrap()
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// diag(1/p, 1, p).
pub fn g1(p: Prime) -> Matrix3 {
    Matrix3::p_diagonal(p, [-1, 0, 1])
}

/// Coordinate 3-cycle composed with the elementary unipotent.
pub fn g2() -> Matrix3 {
    let w = Matrix3::from_ints([[0, 0, 1], [1, 0, 0], [0, 1, 0]]);
    let u = Matrix3::from_ints([[1, 1, 0], [0, 1, 0], [0, 0, 1]]);
    &w * &u
}

/// uniform{g₁^{±1}, g₂^{±1}}.
pub fn fixture(seed: u64) -> MeasureSpec {
    let p = p3();
    MeasureSpec::new(p, vec![(g1(p), Rational::one()), (g2(), Rational::one())], true, seed).unwrap()
}

pub fn dirac(m: Matrix3) -> MeasureSpec {
    MeasureSpec::new(p3(), vec![(m, Rational::one())], false, 1).unwrap()
}

pub mod gen {
    //! proptest strategies for matrices, vertices and flags at p = 3.

    use btwalk::building::{act, BuildingVertex, Flag};
    use btwalk::padic::{Matrix2, Matrix3, Prime, Rational};
    use btwalk::panel_tree::{TreeEnd, TreeVertex};
    use num_traits::Zero;
    use proptest::prelude::*;

    use super::{p3, q};

    /// Entries from {0, ±1, ±2, ±p, ±1/p}.
    pub fn entry() -> impl Strategy<Value = Rational> {
        prop_oneof![
            Just(q(0, 1)),
            Just(q(1, 1)),
            Just(q(-1, 1)),
            Just(q(2, 1)),
            Just(q(3, 1)),
            Just(q(-3, 1)),
            Just(q(1, 3)),
            Just(q(-1, 3)),
        ]
    }

    pub fn invertible() -> impl Strategy<Value = Matrix3> {
        proptest::array::uniform9(entry())
            .prop_map(|e| Matrix3::from_fn(|i, j| e[3 * i + j].clone()))
            .prop_filter("invertible", |m| !m.det().is_zero())
    }

    fn elementary(i: usize, j: usize, c: Rational) -> Matrix3 {
        Matrix3::from_fn(|r, s| {
            if r == s {
                q(1, 1)
            } else if (r, s) == (i, j) {
                c.clone()
            } else {
                q(0, 1)
            }
        })
    }

    /// Products of elementary matrices and a p-power diagonal: det 1.
    pub fn sl3() -> impl Strategy<Value = Matrix3> {
        let p = p3();
        (
            proptest::collection::vec((0usize..3, 0usize..3, entry()), 1..6),
            -2i64..=2,
            -2i64..=2,
        )
            .prop_map(move |(ops, a, b)| {
                let mut m = Matrix3::p_diagonal(p, [a, b, -a - b]);
                for (i, j, c) in ops {
                    if i != j {
                        m = &m * &elementary(i, j, c);
                    }
                }
                m
            })
    }

    /// p-unimodular elements of SL₃: signed permutations times integer elementary matrices.
    pub fn unimodular() -> impl Strategy<Value = Matrix3> {
        let perms = [
            [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
            [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
            [[0, 1, 0], [0, 0, 1], [1, 0, 0]],
            [[0, -1, 0], [1, 0, 0], [0, 0, 1]],
            [[-1, 0, 0], [0, 0, 1], [0, 1, 0]],
            [[1, 0, 0], [0, 0, -1], [0, 1, 0]],
        ];
        (
            0usize..6,
            proptest::collection::vec((0usize..3, 0usize..3, -4i64..=4), 0..5),
        )
            .prop_map(move |(k, ops)| {
                let mut m = Matrix3::from_ints(perms[k]);
                for (i, j, c) in ops {
                    if i != j {
                        m = &m * &elementary(i, j, q(c, 1));
                    }
                }
                m
            })
    }

    pub fn vertex() -> impl Strategy<Value = BuildingVertex> {
        sl3().prop_map(|g| act(&g, &BuildingVertex::standard(p3())).unwrap())
    }

    pub fn flag() -> impl Strategy<Value = Flag> {
        invertible().prop_map(|g| Flag::standard().act(&g).unwrap())
    }

    pub fn prime() -> Prime {
        p3()
    }

    /// p-unimodular 2×2 matrices: signed swaps times integer elementary matrices.
    pub fn unimodular2() -> impl Strategy<Value = Matrix2> {
        (any::<bool>(), proptest::collection::vec((any::<bool>(), -4i64..=4), 0..5)).prop_map(|(swap, ops)| {
            let mut m = if swap {
                Matrix2::from_ints([[0, -1], [1, 0]])
            } else {
                Matrix2::identity()
            };
            for (upper, c) in ops {
                let e = if upper {
                    Matrix2::from_ints([[1, c], [0, 1]])
                } else {
                    Matrix2::from_ints([[1, 0], [c, 1]])
                };
                m = &m * &e;
            }
            m
        })
    }

    /// Ends with branch points near the base vertex: ⟨(1, a)⟩ for a < p³, or ⟨(0, 1)⟩.
    pub fn tree_end() -> impl Strategy<Value = TreeEnd> {
        (0i64..28).prop_map(|a| if a == 27 { TreeEnd::from_ints([0, 1]) } else { TreeEnd::from_ints([1, a]) }.unwrap())
    }

    pub fn distinct_ends(min: usize, max: usize) -> impl Strategy<Value = Vec<TreeEnd>> {
        proptest::collection::btree_set(tree_end(), min..=max)
            .prop_map(|s| s.into_iter().collect::<Vec<_>>())
            .prop_shuffle()
    }

    /// Lattice classes spanned by small rational 2×2 matrices.
    pub fn tree_vertex() -> impl Strategy<Value = TreeVertex> {
        proptest::array::uniform4(entry())
            .prop_map(|e| Matrix2::from_rows([[e[0].clone(), e[1].clone()], [e[2].clone(), e[3].clone()]]))
            .prop_filter("invertible", |m| !m.det().is_zero())
            .prop_map(|m| TreeVertex::from_basis(p3(), &m).unwrap())
    }
}

pub mod oracle {
    //! Independent reference computations.

    use std::collections::BTreeSet;

    use btwalk::padic::{valuation, Matrix3, Prime, Rational};
    use btwalk::panel_tree::{gromov_product, TreeEnd, TreePoint, TreeVertex};
    use num_traits::{Signed, Zero};

    /// Elementary-divisor valuations from the minimal valuations of the
    /// entries, the 2×2 minors and the determinant.
    pub fn minor_valuations(p: Prime, m: &Matrix3) -> [i64; 3] {
        let r = m.rows();
        let v1 = r.iter().flatten().filter_map(|x| valuation(p, x)).min().unwrap();
        let pairs = [(0, 1), (0, 2), (1, 2)];
        let mut v12 = i64::MAX;
        for &(a, b) in &pairs {
            for &(c, d) in &pairs {
                let minor = &r[a][c] * &r[b][d] - &r[a][d] * &r[b][c];
                if let Some(v) = valuation(p, &minor) {
                    v12 = v12.min(v);
                }
            }
        }
        let vd = valuation(p, &m.det()).unwrap();
        [v1, v12 - v1, vd - v12]
    }

    /// Type from valuations: sort (mean − v) descending.
    pub fn type_of(p: Prime, m: &Matrix3) -> [Rational; 3] {
        let v = minor_valuations(p, m);
        let mean = Rational::new((v[0] + v[1] + v[2]).into(), 3.into());
        let mut t: Vec<Rational> = v.iter().map(|&x| &mean - Rational::from_integer(x.into())).collect();
        t.sort_by(|a, b| b.cmp(a));
        [t[0].clone(), t[1].clone(), t[2].clone()]
    }

    /// All tree vertices within `radius` of `center`, by breadth-first search.
    pub fn tree_ball(center: &TreeVertex, radius: u64) -> Vec<TreeVertex> {
        let mut seen = BTreeSet::from([center.clone()]);
        let mut frontier = vec![center.clone()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for v in &frontier {
                for w in v.neighbors() {
                    if seen.insert(w.clone()) {
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        seen.into_iter().collect()
    }

    /// Σ over ordered pairs of distinct ends of the Gromov product at a vertex.
    pub fn objective(ends: &[TreeEnd], v: &TreeVertex) -> Rational {
        let xi = TreePoint::vertex(v.clone());
        let mut total = Rational::zero();
        for (i, c) in ends.iter().enumerate() {
            for (j, d) in ends.iter().enumerate() {
                if i != j {
                    total += gromov_product(&xi, c, d).unwrap();
                }
            }
        }
        total
    }

    /// Minimize the objective over `ball`, then take the midpoint of a
    /// diameter of the minimizing vertices.
    pub fn bary_brute(ends: &[TreeEnd], ball: &[TreeVertex]) -> TreePoint {
        let values: Vec<(Rational, &TreeVertex)> = ball.iter().map(|v| (objective(ends, v), v)).collect();
        let min = values.iter().map(|(f, _)| f.clone()).min().unwrap();
        let argmin: Vec<&TreeVertex> = values.iter().filter(|(f, _)| *f == min).map(|(_, v)| *v).collect();
        let (mut a, mut b) = (argmin[0], argmin[0]);
        for x in &argmin {
            for y in &argmin {
                if x.distance(y) > a.distance(b) {
                    (a, b) = (x, y);
                }
            }
        }
        let d = Rational::from_integer(a.distance(b).into());
        TreePoint::on_segment(a, b, &(d / Rational::from_integer(2.into()))).unwrap()
    }

    /// The vertex of `ball` at which all three ends pairwise have Gromov product 0.
    pub fn tripod_brute(ends: [&TreeEnd; 3], ball: &[TreeVertex]) -> TreeVertex {
        let zero = Some(Rational::zero());
        let hits: Vec<&TreeVertex> = ball
            .iter()
            .filter(|v| {
                let xi = TreePoint::vertex((*v).clone());
                gromov_product(&xi, ends[0], ends[1]) == zero
                    && gromov_product(&xi, ends[0], ends[2]) == zero
                    && gromov_product(&xi, ends[1], ends[2]) == zero
            })
            .collect();
        assert_eq!(hits.len(), 1);
        hits[0].clone()
    }

    /// a ≤ b + c for a = √a2, b = √b2, c = √c2, decided exactly.
    pub fn sqrt_triangle(a2: &Rational, b2: &Rational, c2: &Rational) -> bool {
        let excess = a2 - b2 - c2;
        !excess.is_positive() || &excess * &excess <= Rational::from_integer(4.into()) * b2 * c2
    }
}
