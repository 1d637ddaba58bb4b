use num_traits::Zero;

use super::{valuation, Matrix, Prime};
use crate::error::{Error, Result};

/// `input = n · diag(p^{b₁}, …, p^{b_N}) · k` with `n` upper unipotent and `k` in GL_N(ℤ₍ₚ₎).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IwasawaDecomposition<const N: usize> {
    pub n: Matrix<N>,
    pub exponents: [i64; N],
    pub k: Matrix<N>,
}

impl<const N: usize> IwasawaDecomposition<N> {
    pub fn reconstruct(&self, p: Prime) -> Matrix<N> {
        &(&self.n * &Matrix::p_diagonal(p, self.exponents)) * &self.k
    }
}

/// Flag-respecting column elimination: the last row fixes b_N, then the row
/// above it among the remaining columns, and so on.
pub fn iwasawa_decompose<const N: usize>(p: Prime, m: &Matrix<N>) -> Result<IwasawaDecomposition<N>> {
    if m.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    let mut a = m.clone();
    let mut k = Matrix::<N>::identity();
    let mut exps = [0i64; N];

    for r in (0..N).rev() {
        let mut best: Option<(i64, usize)> = None;
        for j in 0..=r {
            if let Some(v) = valuation(p, &a[(r, j)]) {
                if best.is_none_or(|(b, _)| v < b) {
                    best = Some((v, j));
                }
            }
        }
        let (b, j) = best.expect("leading block stays nonsingular");
        exps[r] = b;
        a.swap_cols(j, r);
        k.swap_rows(j, r);

        let unit = &a[(r, r)] / p.rpow(b);
        for i in 0..N {
            a[(i, r)] = &a[(i, r)] / &unit;
            k[(r, i)] = &k[(r, i)] * &unit;
        }
        let pivot = a[(r, r)].clone();
        for j in 0..r {
            if a[(r, j)].is_zero() {
                continue;
            }
            let f = &a[(r, j)] / &pivot;
            for i in 0..N {
                let t = &f * &a[(i, r)];
                a[(i, j)] -= t;
            }
            for c in 0..N {
                let t = &f * &k[(j, c)];
                k[(r, c)] += t;
            }
        }
    }
    let n = &a * &Matrix::p_diagonal(p, exps.map(|e| -e));
    Ok(IwasawaDecomposition { n, exponents: exps, k })
}
