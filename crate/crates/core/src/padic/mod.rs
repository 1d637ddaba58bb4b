//! Exact p-adic valuation arithmetic on the rationals localized at a prime.
//!
//! Every quantity lives in ℚ. The p-local integers ℤ₍ₚ₎ = {a/b : p ∤ b} play
//! the role of the valuation ring, so all decompositions here are exact:
//! no truncated p-adic expansions and no precision bookkeeping.

mod hermite;
mod iwasawa;
mod matrix;
mod smith;

pub use hermite::{hermite_canonical, lattice_canonical};
pub use iwasawa::{iwasawa_decompose, IwasawaDecomposition};
pub use matrix::{Matrix, Matrix2, Matrix3};
pub use smith::{smith_decompose, SmithDecomposition};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// A small prime, fixed per experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || (2..).take_while(|d| d * d <= p).any(|d| p % d == 0) {
            return Err(Error::NotPrime(p));
        }
        Ok(Prime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn big(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// p^k as an integer.
    pub fn pow(self, k: u64) -> BigInt {
        num_traits::pow(self.big(), k as usize)
    }

    /// p^k as a rational, for any integer exponent.
    pub fn rpow(self, k: i64) -> Rational {
        let m = Rational::from_integer(self.pow(k.unsigned_abs()));
        if k >= 0 {
            m
        } else {
            m.recip()
        }
    }

    /// Largest power p^k fitting in a u64, used to strip factors quickly.
    fn chunk(self) -> (u64, u64) {
        let mut pk = self.0;
        let mut k = 1;
        while let Some(next) = pk.checked_mul(self.0) {
            pk = next;
            k += 1;
        }
        (pk, k)
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;
    fn try_from(p: u64) -> Result<Self> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl std::fmt::Display for Prime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn uint_valuation(p: Prime, n: &BigUint) -> u64 {
    let (pk, k) = p.chunk();
    let mut n = n.clone();
    let mut v = 0;
    while (&n % pk).is_zero() {
        n /= pk;
        v += k;
    }
    while (&n % p.0).is_zero() {
        n /= p.0;
        v += 1;
    }
    v
}

/// v_p of an integer; `None` stands for +∞ (the integer 0).
pub fn int_valuation(p: Prime, n: &BigInt) -> Option<u64> {
    if n.is_zero() {
        None
    } else {
        Some(uint_valuation(p, n.magnitude()))
    }
}

/// v_p of a rational; `None` stands for +∞ (the rational 0).
pub fn valuation(p: Prime, q: &Rational) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    let num = uint_valuation(p, q.numer().magnitude()) as i64;
    let den = uint_valuation(p, q.denom().magnitude()) as i64;
    Some(num - den)
}

/// Minimum of two valuations under the +∞ convention.
pub fn min_val(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

/// Reduces a p-integral rational modulo p^k to a representative in [0, p^k).
///
/// Panics if `q` is not p-integral.
pub fn residue(p: Prime, q: &Rational, k: u64) -> BigInt {
    let modulus = p.pow(k);
    if k == 0 {
        return BigInt::zero();
    }
    let num = q.numer().mod_floor(&modulus);
    if q.denom().is_one() {
        return num;
    }
    let den = q.denom().mod_floor(&modulus);
    let inv = den
        .modinv(&modulus)
        .expect("residue of a rational with p in the denominator");
    (num * inv).mod_floor(&modulus)
}

/// Inverse of a p-adic unit modulo p^k.
pub fn unit_inverse(p: Prime, u: &BigInt, k: u64) -> BigInt {
    let modulus = p.pow(k);
    u.mod_floor(&modulus)
        .modinv(&modulus)
        .expect("inverse of a non-unit")
}

/// A rational together with its cached p-adic valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuedScalar {
    value: Rational,
    prime: Prime,
    valuation: Option<i64>,
}

impl ValuedScalar {
    pub fn new(prime: Prime, value: Rational) -> Self {
        let valuation = valuation(prime, &value);
        ValuedScalar {
            value,
            prime,
            valuation,
        }
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// `None` is +∞.
    pub fn valuation(&self) -> Option<i64> {
        self.valuation
    }

    pub fn is_integral(&self) -> bool {
        self.valuation.is_none_or(|v| v >= 0)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation == Some(0)
    }

    pub fn mul(&self, other: &ValuedScalar) -> ValuedScalar {
        debug_assert_eq!(self.prime, other.prime);
        ValuedScalar {
            value: &self.value * &other.value,
            prime: self.prime,
            valuation: match (self.valuation, other.valuation) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
        }
    }

    pub fn add(&self, other: &ValuedScalar) -> ValuedScalar {
        debug_assert_eq!(self.prime, other.prime);
        ValuedScalar::new(self.prime, &self.value + &other.value)
    }
}

/// Parses "a", "-a", "a/b" into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// Formats a rational as "a" or "a/b".
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // numerator and denominator both overflow f64
        let shift = q.numer().bits().max(q.denom().bits()) as i64 - 900;
        let n = (q.numer().abs() >> shift.max(0) as usize).to_f64().unwrap_or(f64::MAX);
        let d = (q.denom() >> shift.max(0) as usize).to_f64().unwrap_or(f64::MAX);
        let v = n / d;
        if q.is_negative() {
            -v
        } else {
            v
        }
    })
}
