//! Exact self-test: every suite compares the library against an independent
//! oracle on seeded random inputs.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::building::{act, cartan_type, flag_distance, BuildingVertex, Flag};
use crate::padic::{hermite_canonical, smith_decompose, valuation, Matrix3, Prime, Rational};
use crate::weyl::opposition_involution;

const CASES: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

fn entry(rng: &mut ChaCha8Rng, p: Prime) -> Rational {
    let pp = Rational::from_integer(p.big());
    let x = match rng.gen_range(0..4) {
        0 => Rational::zero(),
        1 => Rational::from_integer(1.into()),
        2 => pp.clone(),
        _ => pp.recip(),
    };
    if rng.gen_bool(0.5) {
        -x
    } else {
        x
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, p: Prime) -> Matrix3 {
    Matrix3::from_fn(|_, _| entry(rng, p))
}

fn random_invertible(rng: &mut ChaCha8Rng, p: Prime) -> Matrix3 {
    loop {
        let m = random_matrix(rng, p);
        if !m.det().is_zero() {
            return m;
        }
    }
}

fn random_sl3(rng: &mut ChaCha8Rng, p: Prime) -> Matrix3 {
    let one = Rational::from_integer(1.into());
    loop {
        let m = random_matrix(rng, p);
        if m.det() == one {
            return m;
        }
    }
}

/// Elementary-divisor valuations from minimal valuations of the k×k minors.
fn minor_oracle(p: Prime, m: &Matrix3) -> [i64; 3] {
    let r = m.rows();
    let v1 = r.iter().flatten().filter_map(|x| valuation(p, x)).min().expect("nonzero");
    let mut v12 = i64::MAX;
    for (i1, i2) in [(0, 1), (0, 2), (1, 2)] {
        for (j1, j2) in [(0, 1), (0, 2), (1, 2)] {
            let minor = &r[i1][j1] * &r[i2][j2] - &r[i1][j2] * &r[i2][j1];
            if let Some(v) = valuation(p, &minor) {
                v12 = v12.min(v);
            }
        }
    }
    let vd = valuation(p, &m.det()).expect("invertible");
    [v1, v12 - v1, vd - v12]
}

fn suite(name: &'static str, f: impl FnMut(usize) -> bool) -> SuiteResult {
    let failures = (0..CASES).map(f).filter(|ok| !ok).count();
    SuiteResult {
        name,
        cases: CASES,
        failures,
    }
}

/// a ≤ b + c for a = √a2 etc., decided exactly.
fn sqrt_triangle(a2: &Rational, b2: &Rational, c2: &Rational) -> bool {
    let excess = a2 - b2 - c2;
    !excess.is_positive() || &excess * &excess <= Rational::from_integer(4.into()) * b2 * c2
}

pub fn self_check(p: Prime, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let o = BuildingVertex::standard(p);
    let mut suites = Vec::new();

    suites.push(suite("smith_vs_minor_gcd", |_| {
        let m = random_sl3(&mut rng, p);
        match smith_decompose(p, &m) {
            Ok(s) => s.valuations == minor_oracle(p, &m) && s.reconstruct(p) == m,
            Err(_) => false,
        }
    }));

    suites.push(suite("hermite_idempotence", |_| {
        let b = random_invertible(&mut rng, p);
        let k = Matrix3::from_ints([[1, rng.gen_range(-3..=3), 0], [0, 1, 0], [rng.gen_range(-3..=3), 0, 1]]);
        let (Ok(h), Ok(hk)) = (hermite_canonical(p, &b), hermite_canonical(p, &(&b * &k))) else {
            return false;
        };
        hermite_canonical(p, &h).is_ok_and(|hh| hh == h) && hk == h
    }));

    suites.push(suite("metric_axioms", |_| {
        let vs: Vec<BuildingVertex> = (0..3)
            .map(|_| act(&random_sl3(&mut rng, p), &o).expect("det 1"))
            .collect();
        let (x, y, z) = (&vs[0], &vs[1], &vs[2]);
        let txy = cartan_type(x, y);
        let symmetric = cartan_type(y, x) == opposition_involution(&txy);
        let zero = cartan_type(x, x).is_zero();
        let d = |a: &BuildingVertex, b: &BuildingVertex| cartan_type(a, b).norm_sq();
        symmetric && zero && sqrt_triangle(&d(x, z), &d(x, y), &d(y, z))
    }));

    suites.push(suite("flag_ultrametric", |_| {
        let fs: Vec<Flag> = (0..3)
            .map(|_| Flag::standard().act(&random_invertible(&mut rng, p)).expect("invertible"))
            .collect();
        // exponents, with None standing for δ = 0
        let e = |a: &Flag, b: &Flag| flag_distance(p, a, b).exponent.map_or(u64::MAX, |k| k);
        e(&fs[0], &fs[2]) >= e(&fs[0], &fs[1]).min(e(&fs[1], &fs[2]))
            && e(&fs[0], &fs[1]) == e(&fs[1], &fs[0])
            && e(&fs[0], &fs[0]) == u64::MAX
    }));

    CheckReport {
        passed: suites.iter().all(|s| s.failures == 0),
        suites,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passes_for_small_primes() {
        for p in [2, 3, 5] {
            let r = self_check(Prime::new(p).unwrap(), 1);
            assert!(r.passed, "{r:?}");
        }
    }
}
