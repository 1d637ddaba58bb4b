use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use super::MeasureSpec;
use crate::building::{cross, flag_distance, flag_mod_p, BuildingVertex, Flag, FlagDistance, GermChamber, IntVec};
use crate::error::{Error, Result};
use crate::padic::{format_rational, int_valuation, lattice_canonical, rational_to_f64, Prime, Rational};
use crate::weyl::TypeVector;

type IntMat = [[BigInt; 3]; 3];

/// What is known about Z_n after step n.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub traj: u64,
    pub n: u64,
    /// θ(o, Z_n o).
    pub theta: TypeVector,
    /// d(Z_{n−1} o, Z_n o)², exact.
    pub step_sq: Rational,
    /// Attracting flag of Z_n; absent while its type is singular.
    pub flag: Option<Flag>,
    pub germ: Option<GermChamber>,
    /// δ(F_{n−1}, F_n); absent unless both flags are present.
    pub flag_gap: Option<FlagDistance>,
}

impl TrajectoryRecord {
    pub fn step_disp(&self) -> f64 {
        rational_to_f64(&self.step_sq).sqrt()
    }
}

impl Serialize for TrajectoryRecord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(8))?;
        m.serialize_entry("traj", &self.traj)?;
        m.serialize_entry("n", &self.n)?;
        m.serialize_entry("theta", &self.theta)?;
        m.serialize_entry("step", &self.step_disp())?;
        m.serialize_entry("step_sq", &format_rational(&self.step_sq))?;
        m.serialize_entry("flag", &self.flag)?;
        m.serialize_entry("germ", &self.germ)?;
        // δ = 0 between identical flags is written as an infinite exponent
        let gap: Option<serde_json::Value> = self.flag_gap.map(|g| match g.exponent {
            Some(k) => k.into(),
            None => "inf".into(),
        });
        m.serialize_entry("gap_exp", &gap)?;
        m.end()
    }
}

fn min_valuation<'a>(p: Prime, xs: impl IntoIterator<Item = &'a BigInt>) -> Option<u64> {
    xs.into_iter().filter_map(|x| int_valuation(p, x)).min()
}

fn reduce(v: &IntVec, modulus: &BigInt) -> IntVec {
    std::array::from_fn(|i| v[i].mod_floor(modulus))
}

/// The running product Z_n = ω₁⋯ω_n, held as an integer matrix T with
/// T ≡ p^e·Z_n modulo p^q, where p^e·Z_n is p-integral with a unit entry.
///
/// The precision q starts at 1 + Σ spread(ω_i) and loses the common factor
/// p^d divided out at each step, which keeps q > V + Σ_{i>n} spread(ω_i) for
/// V the top elementary-divisor valuation of p^e·Z_n. That is enough to read
/// θ, the attracting flag and the vertex Z_n o off T exactly.
#[derive(Debug, Clone)]
pub struct Walk<'a> {
    spec: &'a MeasureSpec,
    traj: u64,
    increments: Vec<usize>,
    n: u64,
    t: IntMat,
    q: u64,
    modulus: BigInt,
    e: i64,
    /// Top elementary-divisor valuation of p^e·Z_n.
    top: u64,
    prev_flag: Option<Flag>,
}

impl<'a> Walk<'a> {
    pub fn new(spec: &'a MeasureSpec, traj: u64, steps: u64) -> Self {
        let increments = spec.draw_increments(traj, steps);
        let total: u64 = increments.iter().map(|&i| spec.atoms()[i].spread).sum();
        let q = total + 1;
        let one = BigInt::one;
        let zero = BigInt::zero;
        Walk {
            spec,
            traj,
            n: 0,
            t: [[one(), zero(), zero()], [zero(), one(), zero()], [zero(), zero(), one()]],
            q,
            modulus: spec.prime().pow(q),
            e: 0,
            top: 0,
            prev_flag: None,
            increments,
        }
    }

    pub fn index(&self) -> u64 {
        self.n
    }

    pub fn increments(&self) -> &[usize] {
        &self.increments
    }

    /// The vertex Z_n o: the lattice spanned by T's columns and p^V ℤ³.
    pub fn vertex(&self) -> BuildingVertex {
        let p = self.spec.prime();
        let m = p.pow(self.top);
        let mut gens: Vec<[Rational; 3]> = (0..3)
            .map(|j| std::array::from_fn(|i| Rational::from_integer(self.t[i][j].mod_floor(&m))))
            .collect();
        for i in 0..3 {
            gens.push(std::array::from_fn(|r| {
                if r == i {
                    Rational::from_integer(m.clone())
                } else {
                    Rational::zero()
                }
            }));
        }
        let canon = lattice_canonical(p, &gens).expect("full-rank lattice");
        BuildingVertex::from_basis(p, &canon).expect("canonical basis")
    }

    /// Advances one step; `None` once all increments are used.
    pub fn step(&mut self) -> Option<TrajectoryRecord> {
        let &idx = self.increments.get(self.n as usize)?;
        self.n += 1;
        let p = self.spec.prime();
        let atom = &self.spec.atoms()[idx];

        let mut prod: IntMat = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let mut acc = BigInt::zero();
                for k in 0..3 {
                    if !atom.numer[k][j].is_zero() {
                        acc += &self.t[i][k] * &atom.numer[k][j];
                    }
                }
                acc
            })
        });
        let inv_den = (!atom.denom.is_one()).then(|| {
            atom.denom
                .mod_floor(&self.modulus)
                .modinv(&self.modulus)
                .expect("denominator prime to p")
        });
        for x in prod.iter_mut().flatten() {
            if let Some(inv) = &inv_den {
                *x *= inv;
            }
            *x = x.mod_floor(&self.modulus);
        }
        let d = min_valuation(p, prod.iter().flatten()).expect("precision covers the product");
        let pd = p.pow(d);
        for x in prod.iter_mut().flatten() {
            *x /= &pd;
        }
        self.t = prod;
        self.q -= d;
        self.modulus /= &pd;
        self.e += atom.shift - d as i64;

        // minors, known modulo p^b with b above the new top valuation
        let bound = (self.top + atom.spread + 1 - d).min(self.q);
        let mb = p.pow(bound);
        let cols: [IntVec; 3] =
            std::array::from_fn(|j| std::array::from_fn(|i| self.t[i][j].mod_floor(&mb)));
        let pairs = [(0, 1), (0, 2), (1, 2)];
        let crosses: Vec<IntVec> = pairs
            .iter()
            .map(|&(a, b)| reduce(&cross(&cols[a], &cols[b]), &mb))
            .collect();
        let m2 = min_valuation(p, crosses.iter().flatten()).expect("invertible product");
        let top = (3 * self.e) as u64 - m2;
        self.top = top;
        debug_assert!(self.q > top);

        let theta = TypeVector::from_ints([self.e, self.e - m2 as i64, m2 as i64 - 2 * self.e])
            .expect("elementary divisors are sorted");
        let (a1, a2) = (m2, top - m2);
        let flag = (a1 > 0 && a2 > 0).then(|| {
            let u = cols
                .iter()
                .find(|c| c.iter().any(|x| int_valuation(p, x) == Some(0)))
                .expect("p^e Z_n has a unit entry");
            let pm2 = p.pow(m2);
            let w = crosses
                .iter()
                .find(|c| c.iter().any(|x| int_valuation(p, x) == Some(m2)))
                .expect("some minor attains the minimum");
            let normal: IntVec = std::array::from_fn(|i| &w[i] / &pm2);
            Flag::truncated(p, u, a1, &normal, a2)
        });
        let germ = flag.as_ref().map(|f| flag_mod_p(p, f));
        let flag_gap = match (&self.prev_flag, &flag) {
            (Some(a), Some(b)) => Some(flag_distance(p, a, b)),
            _ => None,
        };
        self.prev_flag = flag.clone();
        Some(TrajectoryRecord {
            traj: self.traj,
            n: self.n,
            theta,
            step_sq: atom.step_sq.clone(),
            flag,
            germ,
            flag_gap,
        })
    }
}

impl Iterator for Walk<'_> {
    type Item = TrajectoryRecord;
    fn next(&mut self) -> Option<TrajectoryRecord> {
        self.step()
    }
}

/// The first `steps` records of trajectory `traj`.
pub fn sample_path(spec: &MeasureSpec, steps: u64, traj: u64) -> Result<Vec<TrajectoryRecord>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("a path needs at least one step".into()));
    }
    Ok(Walk::new(spec, traj, steps).collect())
}
