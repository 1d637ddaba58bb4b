use num_traits::Zero;

use super::{valuation, Matrix, Prime, Rational};
use crate::error::{Error, Result};

/// `input = u · diag(p^{v₁}, …, p^{v_N}) · v` with `u`, `v` in GL_N(ℤ₍ₚ₎)
/// and valuations sorted increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithDecomposition<const N: usize> {
    pub u: Matrix<N>,
    pub valuations: [i64; N],
    pub v: Matrix<N>,
}

impl<const N: usize> SmithDecomposition<N> {
    pub fn diagonal(&self, p: Prime) -> Matrix<N> {
        Matrix::p_diagonal(p, self.valuations)
    }

    pub fn reconstruct(&self, p: Prime) -> Matrix<N> {
        &(&self.u * &self.diagonal(p)) * &self.v
    }
}

/// Smith (p-adic Cartan) decomposition over ℤ₍ₚ₎.
///
/// At each stage the pivot is the remaining entry of minimal valuation, ties
/// broken row-major.
pub fn smith_decompose<const N: usize>(p: Prime, m: &Matrix<N>) -> Result<SmithDecomposition<N>> {
    if m.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    let mut a = m.clone();
    let mut u = Matrix::<N>::identity();
    let mut v = Matrix::<N>::identity();
    let mut vals = [0i64; N];

    for k in 0..N {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in k..N {
            for j in k..N {
                if let Some(val) = valuation(p, &a[(i, j)]) {
                    if best.is_none_or(|(b, _, _)| val < b) {
                        best = Some((val, i, j));
                    }
                }
            }
        }
        let (val, pi, pj) = best.expect("nonsingular matrix has a nonzero pivot");
        vals[k] = val;

        // A ← P A, U ← U P
        a.swap_rows(k, pi);
        u.swap_cols(k, pi);
        // A ← A P, V ← P V
        a.swap_cols(k, pj);
        v.swap_rows(k, pj);

        // pivot = p^val · unit; move the unit into U
        let unit = &a[(k, k)] / p.rpow(val);
        for j in 0..N {
            a[(k, j)] = &a[(k, j)] / &unit;
            u[(j, k)] = &u[(j, k)] * &unit;
        }
        let pivot = a[(k, k)].clone();

        for i in k + 1..N {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = &a[(i, k)] / &pivot;
            for j in k..N {
                let t = &f * &a[(k, j)];
                a[(i, j)] -= t;
            }
            // U ← U E⁻¹ adds f·(column i) to column k
            for r in 0..N {
                let t = &f * &u[(r, i)];
                u[(r, k)] += t;
            }
        }
        for j in k + 1..N {
            if a[(k, j)].is_zero() {
                continue;
            }
            let f = &a[(k, j)] / &pivot;
            a[(k, j)] = Rational::zero();
            // V ← E⁻¹ V adds f·(row j) to row k
            for c in 0..N {
                let t = &f * &v[(j, c)];
                v[(k, c)] += t;
            }
        }
    }
    Ok(SmithDecomposition {
        u,
        valuations: vals,
        v,
    })
}
