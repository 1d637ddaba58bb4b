use num_traits::Zero;

use super::{min_val, residue, valuation, Matrix, Prime, Rational};
use crate::error::{Error, Result};

/// Canonical basis of the homothety class of the ℤ₍ₚ₎-lattice spanned by `basis`'s columns.
///
/// Output: integral, primitive (some entry is a unit), upper triangular with
/// p-power diagonal, each off-diagonal entry reduced into [0, p^{e_i}) where
/// p^{e_i} is the diagonal entry of its row.
pub fn hermite_canonical<const N: usize>(p: Prime, basis: &Matrix<N>) -> Result<Matrix<N>> {
    if basis.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    lattice_canonical(p, &basis.columns())
}

/// Same as [`hermite_canonical`] for an arbitrary spanning set of a full-rank lattice.
pub fn lattice_canonical<const N: usize>(p: Prime, generators: &[[Rational; N]]) -> Result<Matrix<N>> {
    let shift = generators
        .iter()
        .flatten()
        .fold(None, |acc, x| min_val(acc, valuation(p, x)))
        .ok_or(Error::SingularMatrix)?;
    let scale = p.rpow(-shift);
    let mut cols: Vec<[Rational; N]> = generators
        .iter()
        .map(|c| std::array::from_fn(|i| &c[i] * &scale))
        .collect();

    let mut placed: [Option<[Rational; N]>; N] = std::array::from_fn(|_| None);
    let mut exps = [0i64; N];
    for r in (0..N).rev() {
        let mut best: Option<(i64, usize)> = None;
        for (idx, c) in cols.iter().enumerate() {
            if let Some(v) = valuation(p, &c[r]) {
                if best.is_none_or(|(b, _)| v < b) {
                    best = Some((v, idx));
                }
            }
        }
        let (e, idx) = best.ok_or(Error::SingularMatrix)?;
        let pivot = cols.swap_remove(idx);
        for c in cols.iter_mut() {
            if c[r].is_zero() {
                continue;
            }
            let f = &c[r] / &pivot[r];
            for i in 0..N {
                let t = &f * &pivot[i];
                c[i] -= t;
            }
        }
        // make the diagonal entry exactly p^e
        let unit = &pivot[r] / p.rpow(e);
        exps[r] = e;
        placed[r] = Some(pivot.map(|x| x / &unit));
    }
    let mut h: [[Rational; N]; N] = placed.map(|c| c.expect("every row receives a pivot"));

    for j in 0..N {
        for i in (0..j).rev() {
            let e = exps[i] as u64;
            let r = Rational::from_integer(residue(p, &h[j][i], e));
            let c = (&h[j][i] - &r) / p.rpow(e as i64);
            if c.is_zero() {
                continue;
            }
            for row in 0..=i {
                let t = &c * &h[i][row];
                h[j][row] -= t;
            }
        }
    }
    Ok(Matrix::from_columns(&h))
}
