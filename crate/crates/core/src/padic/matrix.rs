use std::ops::{Index, IndexMut, Mul};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{min_val, valuation, Prime, Rational};

/// Square matrix of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix<const N: usize> {
    rows: [[Rational; N]; N],
}

pub type Matrix2 = Matrix<2>;
pub type Matrix3 = Matrix<3>;

impl<const N: usize> Matrix<N> {
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        Matrix {
            rows: std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))),
        }
    }

    pub fn from_rows(rows: [[Rational; N]; N]) -> Self {
        Matrix { rows }
    }

    pub fn from_ints(rows: [[i64; N]; N]) -> Self {
        Self::from_fn(|i, j| Rational::from_integer(rows[i][j].into()))
    }

    pub fn from_columns(cols: &[[Rational; N]; N]) -> Self {
        Self::from_fn(|i, j| cols[j][i].clone())
    }

    pub fn identity() -> Self {
        Self::from_fn(|i, j| if i == j { Rational::one() } else { Rational::zero() })
    }

    pub fn diagonal(d: [Rational; N]) -> Self {
        let mut m = Self::from_fn(|_, _| Rational::zero());
        for (i, x) in d.into_iter().enumerate() {
            m.rows[i][i] = x;
        }
        m
    }

    /// diag(p^{e₁}, …, p^{e_N}).
    pub fn p_diagonal(p: Prime, exps: [i64; N]) -> Self {
        Self::diagonal(exps.map(|e| p.rpow(e)))
    }

    pub fn rows(&self) -> &[[Rational; N]; N] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> [Rational; N] {
        std::array::from_fn(|i| self.rows[i][j].clone())
    }

    pub fn columns(&self) -> [[Rational; N]; N] {
        std::array::from_fn(|j| self.column(j))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.rows[j][i].clone())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_fn(|i, j| &self.rows[i][j] * c)
    }

    pub fn mul_vec(&self, v: &[Rational; N]) -> [Rational; N] {
        std::array::from_fn(|i| {
            self.rows[i]
                .iter()
                .zip(v)
                .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
        })
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[Rational; N]) -> [Rational; N] {
        std::array::from_fn(|j| {
            (0..N).fold(Rational::zero(), |acc, i| acc + &v[i] * &self.rows[i][j])
        })
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        self.rows.swap(a, b);
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        for row in self.rows.iter_mut() {
            row.swap(a, b);
        }
    }

    /// Determinant by fraction-exact Gaussian elimination.
    pub fn det(&self) -> Rational {
        let mut a = self.rows.clone();
        let mut det = Rational::one();
        for k in 0..N {
            let Some(piv) = (k..N).find(|&i| !a[i][k].is_zero()) else {
                return Rational::zero();
            };
            if piv != k {
                a.swap(piv, k);
                det = -det;
            }
            let pivot = a[k][k].clone();
            det *= &pivot;
            for i in k + 1..N {
                if a[i][k].is_zero() {
                    continue;
                }
                let f = &a[i][k] / &pivot;
                for j in k..N {
                    let t = &f * &a[k][j];
                    a[i][j] -= t;
                }
            }
        }
        det
    }

    /// Exact inverse, or `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        let mut a = self.rows.clone();
        let mut inv = Self::identity().rows;
        for k in 0..N {
            let piv = (k..N).find(|&i| !a[i][k].is_zero())?;
            a.swap(piv, k);
            inv.swap(piv, k);
            let pivot = a[k][k].recip();
            for j in 0..N {
                a[k][j] *= &pivot;
                inv[k][j] *= &pivot;
            }
            for i in 0..N {
                if i == k || a[i][k].is_zero() {
                    continue;
                }
                let f = a[i][k].clone();
                for j in 0..N {
                    let t = &f * &a[k][j];
                    a[i][j] -= t;
                    let t = &f * &inv[k][j];
                    inv[i][j] -= t;
                }
            }
        }
        Some(Matrix { rows: inv })
    }

    /// Minimum entry valuation (`None` for the zero matrix).
    pub fn min_valuation(&self, p: Prime) -> Option<i64> {
        self.rows
            .iter()
            .flatten()
            .fold(None, |acc, x| min_val(acc, valuation(p, x)))
    }

    /// Entries p-integral and determinant a p-adic unit, i.e. an element of GL_N(ℤ₍ₚ₎).
    pub fn is_p_unimodular(&self, p: Prime) -> bool {
        self.min_valuation(p).is_none_or(|v| v >= 0) && valuation(p, &self.det()) == Some(0)
    }

    pub fn is_integral(&self) -> bool {
        self.rows.iter().flatten().all(|x| x.is_integer())
    }

    /// Integer entries; panics if some entry is not an integer.
    pub fn to_integers(&self) -> [[BigInt; N]; N] {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                assert!(self.rows[i][j].is_integer(), "non-integral entry");
                self.rows[i][j].numer().clone()
            })
        })
    }
}

impl<const N: usize> Index<(usize, usize)> for Matrix<N> {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.rows[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Matrix<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.rows[i][j]
    }
}

impl<const N: usize> Mul for &Matrix<N> {
    type Output = Matrix<N>;
    fn mul(self, rhs: &Matrix<N>) -> Matrix<N> {
        Matrix::from_fn(|i, j| {
            (0..N).fold(Rational::zero(), |acc, k| acc + &self.rows[i][k] * &rhs.rows[k][j])
        })
    }
}

impl<const N: usize> Mul for Matrix<N> {
    type Output = Matrix<N>;
    fn mul(self, rhs: Matrix<N>) -> Matrix<N> {
        &self * &rhs
    }
}
