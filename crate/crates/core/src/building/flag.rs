use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result, Wall};
use crate::padic::{int_valuation, residue, smith_decompose, unit_inverse, Matrix3, Prime, Rational};
use crate::weyl::WeylElement;

pub(crate) type IntVec = [BigInt; 3];

pub(crate) fn dot(a: &IntVec, b: &IntVec) -> BigInt {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

pub(crate) fn cross(a: &IntVec, b: &IntVec) -> IntVec {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

pub(crate) fn is_zero_vec(v: &IntVec) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Divides by the gcd and makes the first nonzero entry positive.
pub(crate) fn primitivize(v: IntVec) -> IntVec {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return v;
    }
    let sign_neg = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    let g = if sign_neg { -g } else { g };
    v.map(|x| x / &g)
}

/// Integer primitive representative of the line through a nonzero rational vector.
pub(crate) fn primitive_from_rationals(v: &[Rational; 3]) -> IntVec {
    let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    primitivize(std::array::from_fn(|i| (&v[i] * Rational::from_integer(l.clone())).to_integer()))
}

fn first_unit(p: Prime, v: &IntVec) -> Option<usize> {
    v.iter().position(|x| int_valuation(p, x) == Some(0))
}

/// The canonical representative of the point of ℙ²(ℤ/p^k) through `v`:
/// first unit coordinate 1, the others in [0, p^k). Also returns that coordinate.
pub(crate) fn projective_residue(p: Prime, v: &IntVec, k: u64) -> (IntVec, usize) {
    let i = first_unit(p, v).expect("p-primitive vector");
    let modulus = p.pow(k);
    let inv = unit_inverse(p, &v[i], k);
    let mut w: IntVec = std::array::from_fn(|j| (&v[j] * &inv).mod_floor(&modulus));
    w[i] = BigInt::one();
    (w, i)
}

/// A chamber at infinity: an incident (line, plane) pair in ℚ³, with the
/// plane stored as a normal covector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Flag {
    line: IntVec,
    plane: IntVec,
}

impl Flag {
    pub fn new(line: IntVec, plane: IntVec) -> Result<Self> {
        if is_zero_vec(&line) || is_zero_vec(&plane) {
            return Err(Error::InvalidArgument("flag with a zero vector".into()));
        }
        if !dot(&line, &plane).is_zero() {
            return Err(Error::InvalidArgument("line does not lie in the plane".into()));
        }
        Ok(Flag {
            line: primitivize(line),
            plane: primitivize(plane),
        })
    }

    pub fn from_ints(line: [i64; 3], plane: [i64; 3]) -> Result<Self> {
        Flag::new(line.map(BigInt::from), plane.map(BigInt::from))
    }

    /// (⟨e₁⟩, ⟨e₁, e₂⟩).
    pub fn standard() -> Self {
        Flag::from_ints([1, 0, 0], [0, 0, 1]).expect("standard flag")
    }

    /// The flag (⟨a⟩, ⟨a, b⟩) for independent rational vectors a, b.
    pub fn from_spanning(a: &[Rational; 3], b: &[Rational; 3]) -> Result<Self> {
        let u = primitive_from_rationals(a);
        let v = primitive_from_rationals(b);
        let n = cross(&u, &v);
        if is_zero_vec(&u) || is_zero_vec(&n) {
            return Err(Error::InvalidArgument("dependent spanning vectors".into()));
        }
        Flag::new(u, n)
    }

    pub fn line(&self) -> &IntVec {
        &self.line
    }

    /// Normal covector n of the plane: the plane is {x : n·x = 0}.
    pub fn plane(&self) -> &IntVec {
        &self.plane
    }

    /// g·F = (⟨g u⟩, n g⁻¹).
    pub fn act(&self, g: &Matrix3) -> Result<Flag> {
        let inv = g.inverse().ok_or(Error::SingularMatrix)?;
        let u = g.mul_vec(&self.line.clone().map(Rational::from_integer));
        let n = inv.vec_mul(&self.plane.clone().map(Rational::from_integer));
        Flag::new(primitive_from_rationals(&u), primitive_from_rationals(&n))
    }

    /// Canonical representative of the attracting flags of a regular element
    /// with root gaps a1, a2 ≥ 1, given one such flag as p-primitive residues.
    ///
    /// The Cartan factor moves the line by p^{a1} inside the plane and by
    /// p^{a1+a2} out of it, and the normal by p^{a2} among covectors killing
    /// the line. So `line` must be known modulo p^{a1+a2} and `normal` modulo
    /// p^{a2}; the result depends only on those classes.
    pub(crate) fn truncated(p: Prime, line: &IntVec, a1: u64, normal: &IntVec, a2: u64) -> Flag {
        let top = a1 + a2;
        let (mt, m1, m2) = (p.pow(top), p.pow(a1), p.pow(a2));
        let k = first_unit(p, line).expect("p-primitive line");
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        // free coordinates of the normal; one is a unit since n·u ≡ 0 and u_k = 1
        let (l, o) = if int_valuation(p, &normal[i]) == Some(0) { (i, j) } else { (j, i) };
        let n_o = (&normal[o] * unit_inverse(p, &normal[l], a2)).mod_floor(&m2);

        let inv = unit_inverse(p, &line[k], top);
        let mut u: IntVec = std::array::from_fn(|c| (&line[c] * &inv).mod_floor(&mt));
        u[k] = BigInt::one();
        // the plane meets {x_k = 0} in ⟨e_o − n_o e_l⟩
        let (t, r) = u[o].div_mod_floor(&m1);
        u[o] = r;
        u[l] = (&u[l] + t * &m1 * &n_o).mod_floor(&mt);

        let mut n: IntVec = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
        n[l] = BigInt::one();
        n[k] = -(&u[l] + &u[o] * &n_o);
        n[o] = n_o;
        Flag::new(u, n).expect("truncated flag is incident")
    }

    /// The mod-p^k cell containing this flag: both components reduced
    /// projectively modulo p^k.
    pub fn cell(&self, p: Prime, k: u64) -> FlagCell {
        FlagCell {
            line: projective_residue(p, &self.line, k).0,
            plane: projective_residue(p, &self.plane, k).0,
        }
    }
}

impl Serialize for Flag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            line: [String; 3],
            plane: [String; 3],
        }
        Repr {
            line: self.line.clone().map(|x| x.to_string()),
            plane: self.plane.clone().map(|x| x.to_string()),
        }
        .serialize(s)
    }
}

/// Projective residues of a flag's line and plane modulo p^k.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlagCell {
    pub line: IntVec,
    pub plane: IntVec,
}

/// Attracting flag of g: (⟨U e₁⟩, ⟨U e₁, U e₂⟩) for the Smith factor U.
///
/// U is only determined up to the stabilizer of the diagonal Smith factor,
/// so the flag is canonicalized modulo that ambiguity; the result does not
/// depend on pivoting choices.
pub fn cartan_flag(p: Prime, g: &Matrix3) -> Result<Flag> {
    let s = smith_decompose(p, g)?;
    let v = s.valuations;
    let (a1, a2) = ((v[1] - v[0]) as u64, (v[2] - v[1]) as u64);
    match (a1, a2) {
        (0, 0) => return Err(Error::NonRegularType(Wall::Origin)),
        (0, _) => return Err(Error::NonRegularType(Wall::Line)),
        (_, 0) => return Err(Error::NonRegularType(Wall::Plane)),
        _ => {}
    }
    let uinv = s.u.inverse().expect("unimodular");
    let line: IntVec = s.u.column(0).map(|x| residue(p, &x, a1 + a2));
    let normal: IntVec = uinv.rows()[2].clone().map(|x| residue(p, &x, a2));
    Ok(Flag::truncated(p, &line, a1, &normal, a2))
}

/// δ(F, F′) = p^{−m}, with `exponent = None` meaning δ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlagDistance {
    pub exponent: Option<u64>,
}

impl FlagDistance {
    pub fn value(self, p: Prime) -> f64 {
        match self.exponent {
            None => 0.0,
            Some(m) => (p.get() as f64).powi(-(m as i32)),
        }
    }
}

fn minor_exponent(p: Prime, a: &IntVec, b: &IntVec) -> Option<u64> {
    cross(a, b).iter().filter_map(|x| int_valuation(p, x)).min()
}

pub fn flag_distance(p: Prime, f: &Flag, g: &Flag) -> FlagDistance {
    let m_line = minor_exponent(p, &f.line, &g.line);
    let m_plane = minor_exponent(p, &f.plane, &g.plane);
    let exponent = match (m_line, m_plane) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(a.min(b)),
    };
    FlagDistance { exponent }
}

/// Relative position of two flags from their incidence pattern.
pub fn weyl_distance(f: &Flag, g: &Flag) -> WeylElement {
    let same_line = is_zero_vec(&cross(&f.line, &g.line));
    let same_plane = is_zero_vec(&cross(&f.plane, &g.plane));
    match (same_line, same_plane) {
        (true, true) => WeylElement::IDENTITY,
        (false, true) => WeylElement::S1,
        (true, false) => WeylElement::S2,
        (false, false) => {
            if dot(&f.plane, &g.line).is_zero() {
                WeylElement::S1.compose(WeylElement::S2)
            } else if dot(&g.plane, &f.line).is_zero() {
                WeylElement::S2.compose(WeylElement::S1)
            } else {
                WeylElement::LONGEST
            }
        }
    }
}

impl Flag {
    pub fn is_opposite(&self, other: &Flag) -> bool {
        weyl_distance(self, other).length() == 3
    }

    /// det[u, P∩P′, u′] ≠ 0: the frame of the apartment joining the two flags.
    pub fn spans_apartment(&self, other: &Flag) -> bool {
        let meet = cross(&self.plane, &other.plane);
        !dot(&self.line, &cross(&meet, &other.line)).is_zero()
    }
}

/// A chamber of the residue building at o: a flag over the field with p elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GermChamber {
    line: [u64; 3],
    plane: [u64; 3],
}

fn normalize_mod_p(p: u64, v: [u64; 3]) -> Option<[u64; 3]> {
    let v = v.map(|x| x % p);
    let lead = *v.iter().find(|&&x| x != 0)?;
    let inv = BigInt::from(lead)
        .modinv(&BigInt::from(p))
        .and_then(|x| x.to_u64())
        .expect("p is prime");
    Some(v.map(|x| ((x as u128 * inv as u128) % p as u128) as u64))
}

impl GermChamber {
    pub fn new(p: Prime, line: [u64; 3], plane: [u64; 3]) -> Result<Self> {
        let q = p.get();
        let (line, plane) = match (normalize_mod_p(q, line), normalize_mod_p(q, plane)) {
            (Some(l), Some(n)) => (l, n),
            _ => return Err(Error::InvalidArgument("germ with a zero vector".into())),
        };
        let d = (0..3).map(|i| line[i] as u128 * plane[i] as u128).sum::<u128>() % q as u128;
        if d != 0 {
            return Err(Error::InvalidArgument("germ line does not lie in the plane".into()));
        }
        Ok(GermChamber { line, plane })
    }

    pub fn line(&self) -> [u64; 3] {
        self.line
    }

    pub fn plane(&self) -> [u64; 3] {
        self.plane
    }

    /// Action of a p-unimodular matrix through its reduction mod p.
    pub fn act(&self, p: Prime, g: &Matrix3) -> Result<GermChamber> {
        if !g.is_p_unimodular(p) {
            return Err(Error::InvalidArgument("matrix is not p-unimodular".into()));
        }
        let inv = g.inverse().expect("unimodular");
        let q = p.get();
        let red = |m: &Matrix3, i: usize, j: usize| residue(p, &m[(i, j)], 1).to_u64().unwrap() as u128;
        let mut line = [0u64; 3];
        let mut plane = [0u64; 3];
        for i in 0..3 {
            let mut a = 0u128;
            let mut b = 0u128;
            for j in 0..3 {
                a += red(g, i, j) * self.line[j] as u128;
                b += self.plane[j] as u128 * red(&inv, j, i);
            }
            line[i] = (a % q as u128) as u64;
            plane[i] = (b % q as u128) as u64;
        }
        GermChamber::new(p, line, plane)
    }
}

impl Serialize for GermChamber {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            line: [u64; 3],
            plane: [u64; 3],
        }
        Repr {
            line: self.line,
            plane: self.plane,
        }
        .serialize(s)
    }
}

/// Entrywise reduction mod p of the primitive representatives.
pub fn flag_mod_p(p: Prime, f: &Flag) -> GermChamber {
    let red = |v: &IntVec| v.clone().map(|x| x.mod_floor(&p.big()).to_u64().expect("residue fits"));
    GermChamber::new(p, red(&f.line), red(&f.plane)).expect("primitive flags reduce to germs")
}
