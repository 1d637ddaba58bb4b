use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::building::{cartan_type, BuildingVertex};
use crate::error::{Error, Result};
use crate::padic::{smith_decompose, Matrix3, Prime, Rational};

/// Words of generator output reserved for each step.
const WORDS_PER_STEP: u128 = 16;

/// One atom of the step distribution, with the data the walk engine needs.
#[derive(Debug, Clone)]
pub struct Atom {
    pub matrix: Matrix3,
    pub weight: Rational,
    /// p^shift·matrix has p-integral entries, not all divisible by p.
    pub(crate) shift: i64,
    /// Integer numerator of p^shift·matrix.
    pub(crate) numer: [[BigInt; 3]; 3],
    /// Common denominator of p^shift·matrix, prime to p.
    pub(crate) denom: BigInt,
    /// Largest elementary-divisor valuation of p^shift·matrix.
    pub(crate) spread: u64,
    /// d(o, g·o)², exact.
    pub(crate) step_sq: Rational,
}

impl Atom {
    fn prepare(p: Prime, matrix: Matrix3, weight: Rational) -> Result<Self> {
        if !matrix.det().is_one() {
            return Err(Error::NotInGroup);
        }
        let shift = -matrix.min_valuation(p).expect("nonzero matrix");
        let scaled = matrix.scale(&p.rpow(shift));
        let denom = scaled
            .rows()
            .iter()
            .flatten()
            .fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        let d = Rational::from_integer(denom.clone());
        let numer = std::array::from_fn(|i| std::array::from_fn(|j| (&scaled[(i, j)] * &d).to_integer()));
        let spread = smith_decompose(p, &scaled)?.valuations[2] as u64;
        let o = BuildingVertex::standard(p);
        let step_sq = cartan_type(&o, &crate::building::act(&matrix, &o)?).norm_sq();
        Ok(Atom {
            matrix,
            weight,
            shift,
            numer,
            denom,
            spread,
            step_sq,
        })
    }
}

/// A finitely supported probability measure on SL₃(ℚ), with the prime and
/// the seed of the experiment.
#[derive(Debug, Clone)]
pub struct MeasureSpec {
    prime: Prime,
    seed: u64,
    atoms: Vec<Atom>,
    /// Atom weights over the common denominator `total`.
    ticks: Vec<u64>,
    total: u64,
}

impl MeasureSpec {
    /// Validates and normalizes. With `symmetrize`, each atom's inverse is
    /// added with the same weight before normalizing; repeated matrices are merged.
    pub fn new(prime: Prime, atoms: Vec<(Matrix3, Rational)>, symmetrize: bool, seed: u64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let mut raw: Vec<(Matrix3, Rational)> = Vec::new();
        for (g, w) in atoms {
            if !w.is_positive() {
                return Err(Error::InvalidArgument("atom weights must be positive".into()));
            }
            if !g.det().is_one() {
                return Err(Error::NotInGroup);
            }
            let inv = symmetrize.then(|| g.inverse().expect("det 1"));
            raw.push((g, w.clone()));
            if let Some(h) = inv {
                raw.push((h, w));
            }
        }
        let mut merged: Vec<(Matrix3, Rational)> = Vec::new();
        for (g, w) in raw {
            match merged.iter_mut().find(|(h, _)| *h == g) {
                Some((_, acc)) => *acc += w,
                None => merged.push((g, w)),
            }
        }
        let sum: Rational = merged.iter().map(|(_, w)| w).sum();
        let atoms = merged
            .into_iter()
            .map(|(g, w)| Atom::prepare(prime, g, w / &sum))
            .collect::<Result<Vec<_>>>()?;

        let lcm = atoms.iter().fold(BigInt::one(), |l, a| l.lcm(a.weight.denom()));
        let total = lcm
            .to_u64()
            .ok_or_else(|| Error::Config("atom weights have too large a common denominator".into()))?;
        let ticks = atoms
            .iter()
            .map(|a| (&a.weight * Rational::from_integer(lcm.clone())).to_integer().to_u64().expect("fits"))
            .collect();
        Ok(MeasureSpec {
            prime,
            seed,
            atoms,
            ticks,
            total,
        })
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        MeasureSpec { seed, ..self.clone() }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Atom indices of the increments ω₁, …, ω_N of a trajectory.
    ///
    /// Step n draws from a ChaCha8 stream selected by the trajectory id, at a
    /// word position fixed by n, so every increment depends only on
    /// (seed, trajectory, n).
    pub fn draw_increments(&self, traj: u64, steps: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(traj);
        (1..=steps)
            .map(|n| {
                rng.set_word_pos(n as u128 * WORDS_PER_STEP);
                let mut r = rng.gen_range(0..self.total);
                self.ticks
                    .iter()
                    .position(|&t| {
                        if r < t {
                            true
                        } else {
                            r -= t;
                            false
                        }
                    })
                    .expect("ticks sum to total")
            })
            .collect()
    }

    /// True when the atom multiset is closed under inversion with matched weights.
    pub fn is_symmetric(&self) -> bool {
        self.atoms.iter().all(|a| {
            let inv = a.matrix.inverse().expect("det 1");
            self.atoms.iter().any(|b| b.matrix == inv && b.weight == a.weight)
        })
    }
}
