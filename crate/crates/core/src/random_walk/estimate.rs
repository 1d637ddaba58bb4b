use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{MeasureSpec, TrajectoryRecord, Walk};
use crate::building::{adapted_basis, cartan_type, flag_distance, flag_mod_p, BuildingVertex, Flag, FlagCell};
use crate::error::{Error, Result};
use crate::padic::{rational_to_f64, Matrix3, Prime, Rational};
use crate::weyl::{root_pairings, TypeVector};

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `value / se`, with a zero standard error giving ±∞ (or 0 for a zero value).
fn in_se_units(value: f64, se: f64) -> f64 {
    if se > 0.0 {
        value / se
    } else if value == 0.0 {
        0.0
    } else {
        value.signum() * f64::INFINITY
    }
}

/// JSON has no infinities; write them as "inf" / "-inf".
fn finite_or_inf<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_infinite() {
        s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub trajectories: u64,
    pub steps: u64,
    pub lambda_hat: TypeVector,
    /// Standard error of each coordinate of λ̂ across trajectories.
    pub stderr: [f64; 3],
    /// Both root pairings of λ̂ strictly positive.
    pub regular: bool,
    /// Smaller root pairing of λ̂ divided by its standard error.
    #[serde(serialize_with = "finite_or_inf")]
    pub regularity_margin: f64,
    /// ‖λ̂ − ι(λ̂)‖ over its standard error; equals |λ̂₂| / se(λ̂₂).
    #[serde(serialize_with = "finite_or_inf")]
    pub iota_asymmetry: f64,
    /// ‖λ̂‖ over the standard error of the per-trajectory norms' mean.
    #[serde(serialize_with = "finite_or_inf")]
    pub norm_in_se: f64,
    /// Mean of d(o, Z_N o)/N.
    pub drift_hat: f64,
    pub drift_stderr: f64,
}

/// λ̂ = mean over trajectories of θ(o, Z_N o)/N, with across-trajectory errors.
pub fn lyapunov_from_types(types: &[TypeVector], steps: u64) -> Result<EstimateReport> {
    if types.len() < 2 {
        return Err(Error::InvalidArgument("need at least two trajectories".into()));
    }
    let m = types.len();
    let n = Rational::from_integer(steps.into());
    let mut sum = [Rational::zero(), Rational::zero(), Rational::zero()];
    for t in types {
        for (s, c) in sum.iter_mut().zip(t.coords()) {
            *s += c;
        }
    }
    let denom = &n * Rational::from_integer(m.into());
    let lambda_hat = TypeVector::new(sum.map(|s| s / &denom))?;

    let per: Vec<[f64; 3]> = types.iter().map(|t| t.to_f64().map(|x| x / steps as f64)).collect();
    let sqrt_m = (m as f64).sqrt();
    let se = |f: &dyn Fn(&[f64; 3]) -> f64| {
        let xs: Vec<f64> = per.iter().map(f).collect();
        mean_sd(&xs).1 / sqrt_m
    };
    let stderr = [se(&|v| v[0]), se(&|v| v[1]), se(&|v| v[2])];
    let se_a1 = se(&|v| v[0] - v[1]);
    let se_a2 = se(&|v| v[1] - v[2]);
    let (a1, a2, regular) = root_pairings(&lambda_hat);
    let margin = in_se_units(rational_to_f64(&a1), se_a1).min(in_se_units(rational_to_f64(&a2), se_a2));
    let l = lambda_hat.to_f64();
    let iota_asymmetry = in_se_units(l[1].abs(), stderr[1]);
    let norms: Vec<f64> = per.iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).collect();
    let (drift_hat, drift_sd) = mean_sd(&norms);
    let drift_stderr = drift_sd / sqrt_m;
    let norm_in_se = in_se_units(lambda_hat.norm(), drift_stderr);
    Ok(EstimateReport {
        trajectories: m as u64,
        steps,
        lambda_hat,
        stderr,
        regular,
        regularity_margin: margin,
        iota_asymmetry,
        norm_in_se,
        drift_hat,
        drift_stderr,
    })
}

/// Final types θ(o, Z_N o) of trajectories `0..m`, in trajectory order.
pub fn final_types(spec: &MeasureSpec, steps: u64, m: u64) -> Result<Vec<TypeVector>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("a path needs at least one step".into()));
    }
    Ok((0..m)
        .into_par_iter()
        .map(|t| Walk::new(spec, t, steps).last().expect("at least one step").theta)
        .collect())
}

pub fn lyapunov_estimate(spec: &MeasureSpec, steps: u64, m: u64) -> Result<EstimateReport> {
    if m < 2 {
        return Err(Error::InvalidArgument("need at least two trajectories".into()));
    }
    lyapunov_from_types(&final_types(spec, steps, m)?, steps)
}

/// Outcome of limit-flag extraction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum LimitFlag {
    Converged(Flag),
    /// `best` is the largest k with δ(F_n, F_N) ≤ p^{−k} over the last quarter,
    /// `None` when flags are missing there.
    NotConverged { best: Option<u64> },
}

impl LimitFlag {
    pub fn flag(&self) -> Option<&Flag> {
        match self {
            LimitFlag::Converged(f) => Some(f),
            LimitFlag::NotConverged { .. } => None,
        }
    }
}

fn in_last_quarter(n: u64, total: u64) -> bool {
    4 * n > 3 * total
}

/// F_N if every flag of the last quarter is within p^{−k} of it.
fn limit_from_tail(p: Prime, tail: &[Option<&Flag>], k: u64) -> LimitFlag {
    let Some(Some(last)) = tail.last() else {
        return LimitFlag::NotConverged { best: None };
    };
    let mut worst: Option<u64> = None;
    for f in tail {
        let Some(f) = f else {
            return LimitFlag::NotConverged { best: None };
        };
        if let Some(e) = flag_distance(p, f, last).exponent {
            worst = Some(worst.map_or(e, |w| w.min(e)));
        }
    }
    match worst {
        Some(w) if w < k => LimitFlag::NotConverged { best: Some(w) },
        _ => LimitFlag::Converged((*last).clone()),
    }
}

pub fn limit_flag(p: Prime, path: &[TrajectoryRecord], k: u64) -> Result<LimitFlag> {
    let last = path.last().ok_or(Error::EmptyTrajectory)?;
    let tail: Vec<Option<&Flag>> = path
        .iter()
        .filter(|r| in_last_quarter(r.n, last.n))
        .map(|r| r.flag.as_ref())
        .collect();
    Ok(limit_from_tail(p, &tail, k))
}

/// When the germ sequence settles, and whether it settles on the limit germ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GermStabilization {
    /// Smallest n₀ with the germ constant (and present) for all n ≥ n₀.
    pub index: Option<u64>,
    pub matches: bool,
}

#[derive(Default)]
struct GermTracker {
    current: Option<crate::building::GermChamber>,
    since: Option<u64>,
}

impl GermTracker {
    fn push(&mut self, r: &TrajectoryRecord) {
        match (&r.germ, &self.current) {
            (Some(g), Some(c)) if g == c && self.since.is_some() => {}
            (Some(g), _) => {
                self.current = Some(g.clone());
                self.since = Some(r.n);
            }
            (None, _) => {
                self.current = None;
                self.since = None;
            }
        }
    }

    fn finish(&self, p: Prime, limit: Option<&Flag>) -> GermStabilization {
        let matches = match (&self.current, limit) {
            (Some(g), Some(f)) => *g == flag_mod_p(p, f),
            _ => false,
        };
        GermStabilization {
            index: self.since,
            matches,
        }
    }
}

pub fn germ_stabilization(p: Prime, path: &[TrajectoryRecord], limit: &Flag) -> GermStabilization {
    let mut t = GermTracker::default();
    for r in path {
        t.push(r);
    }
    t.finish(p, Some(limit))
}

/// d(Z_n o, γ(n))/n along a ray γ of direction λ in the sector Q(o, F):
/// γ(n) = B·diag(p^{−round(nλ)})·o for an adapted basis B of F.
pub fn tracking_deviation(
    p: Prime,
    points: &[(u64, BuildingVertex)],
    f: &Flag,
    lambda: &TypeVector,
) -> Result<Vec<(u64, f64)>> {
    if !root_pairings(lambda).2 {
        return Err(Error::NonRegular);
    }
    let b = adapted_basis(p, f);
    points
        .iter()
        .map(|(n, x)| {
            let nr = Rational::from_integer((*n).into());
            let a = lambda.coords().clone().map(|c| (&c * &nr).round().to_integer());
            let exps = a.map(|x| -i64::try_from(x).expect("small exponent"));
            let ray = BuildingVertex::from_basis(p, &(&b * &Matrix3::p_diagonal(p, exps)))?;
            let d = cartan_type(&ray, x).norm();
            Ok((*n, d / *n as f64))
        })
        .collect()
}

/// Least-squares slope of log y against log x over the points with y > 0;
/// `None` with fewer than two such points.
pub fn log_log_slope(points: &[(u64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, y)| *y > 0.0)
        .map(|(x, y)| ((*x as f64).ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Per-trajectory statistics gathered in one streaming pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSummary {
    pub traj: u64,
    pub steps: u64,
    pub theta: TypeVector,
    pub limit: LimitFlag,
    /// Germ stabilization against the last flag of the run.
    pub germ: GermStabilization,
    /// Last n with d(o, Z_n o) ≤ 3 (0 if the walk never comes back).
    pub last_return: u64,
    /// Vertices Z_n o at the requested checkpoints.
    #[serde(skip)]
    pub vertices: Vec<(u64, BuildingVertex)>,
}

impl PathSummary {
    pub fn last_flag(&self) -> Option<&Flag> {
        self.limit.flag()
    }
}

pub fn summarize_path(spec: &MeasureSpec, steps: u64, traj: u64, k: u64, checkpoints: &[u64]) -> PathSummary {
    let p = spec.prime();
    let mut walk = Walk::new(spec, traj, steps);
    let mut tail: Vec<Option<Flag>> = Vec::new();
    let mut germs = GermTracker::default();
    let mut last_return = 0;
    let mut vertices = Vec::new();
    let mut theta = TypeVector::zero();
    let nine = Rational::from_integer(9.into());
    while let Some(r) = walk.step() {
        if r.theta.norm_sq() <= nine {
            last_return = r.n;
        }
        if checkpoints.contains(&r.n) {
            vertices.push((r.n, walk.vertex()));
        }
        germs.push(&r);
        if in_last_quarter(r.n, steps) {
            tail.push(r.flag.clone());
        }
        theta = r.theta;
    }
    let tail_refs: Vec<Option<&Flag>> = tail.iter().map(Option::as_ref).collect();
    let limit = limit_from_tail(p, &tail_refs, k);
    let final_flag = tail.last().and_then(Option::as_ref);
    PathSummary {
        traj,
        steps,
        theta,
        germ: germs.finish(p, final_flag),
        limit,
        last_return,
        vertices,
    }
}

/// Summaries of trajectories `ids`, computed in parallel and returned in order.
pub fn summarize_paths(spec: &MeasureSpec, steps: u64, ids: &[u64], k: u64, checkpoints: &[u64]) -> Vec<PathSummary> {
    ids.par_iter()
        .map(|&t| summarize_path(spec, steps, t, k, checkpoints))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OppositionReport {
    pub pairs: u64,
    pub converged_pairs: u64,
    pub skipped: u64,
    pub opposite: u64,
    /// Fraction of converged pairs that are opposite.
    pub rate: f64,
}

pub fn opposition_from_limits(limits: &[(Option<&Flag>, Option<&Flag>)]) -> OppositionReport {
    let mut converged = 0;
    let mut opposite = 0;
    for (a, b) in limits {
        if let (Some(a), Some(b)) = (a, b) {
            converged += 1;
            if a.is_opposite(b) {
                opposite += 1;
            }
        }
    }
    let pairs = limits.len() as u64;
    OppositionReport {
        pairs,
        converged_pairs: converged,
        skipped: pairs - converged,
        opposite,
        rate: if converged == 0 {
            0.0
        } else {
            opposite as f64 / converged as f64
        },
    }
}

/// Pair i uses trajectories 2i and 2i + 1.
pub fn opposition_rate(spec: &MeasureSpec, steps: u64, pairs: u64, k: u64) -> Result<OppositionReport> {
    if pairs == 0 {
        return Err(Error::InvalidArgument("need at least one pair".into()));
    }
    let ids: Vec<u64> = (0..2 * pairs).collect();
    let sums = summarize_paths(spec, steps, &ids, k, &[]);
    let limits: Vec<_> = sums
        .chunks(2)
        .map(|c| (c[0].limit.flag(), c[1].limit.flag()))
        .collect();
    Ok(opposition_from_limits(&limits))
}

/// Cells of a flag sample and of its pushes by each atom, for repeated residual evaluation.
pub struct CellTable {
    own: Vec<usize>,
    pushed: Vec<Vec<usize>>,
    weights: Vec<Rational>,
    cells: usize,
}

impl CellTable {
    pub fn new(spec: &MeasureSpec, flags: &[Flag], depth: u64) -> Result<Self> {
        if depth < 1 {
            return Err(Error::InvalidDepth);
        }
        if flags.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let p = spec.prime();
        let mut ids: BTreeMap<FlagCell, usize> = BTreeMap::new();
        let mut id = |c: FlagCell| {
            let n = ids.len();
            *ids.entry(c).or_insert(n)
        };
        let own = flags.iter().map(|f| id(f.cell(p, depth))).collect();
        let pushed = flags
            .iter()
            .map(|f| {
                spec.atoms()
                    .iter()
                    .map(|a| Ok(id(f.act(&a.matrix)?.cell(p, depth))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CellTable {
            own,
            pushed,
            weights: spec.atoms().iter().map(|a| a.weight.clone()).collect(),
            cells: ids.len(),
        })
    }

    /// Total variation between the empirical cell law of the sample (given
    /// by indices into it) and that of its convolution with μ.
    pub fn residual(&self, sample: impl Iterator<Item = usize> + Clone) -> f64 {
        let mut diff = vec![Rational::zero(); self.cells];
        let mut count = 0u64;
        for i in sample {
            count += 1;
            diff[self.own[i]] += Rational::from_integer(1.into());
            for (c, w) in self.pushed[i].iter().zip(&self.weights) {
                diff[*c] -= w;
            }
        }
        let tv: Rational = diff.iter().map(|d| d.abs()).sum::<Rational>() / Rational::from_integer((2 * count).into());
        rational_to_f64(&tv)
    }
}

/// Total-variation distance between the mod-p^k cell law of the sample and
/// of its convolution with μ.
pub fn stationarity_residual(spec: &MeasureSpec, flags: &[Flag], depth: u64) -> Result<f64> {
    let t = CellTable::new(spec, flags, depth)?;
    Ok(t.residual(0..flags.len()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityReport {
    pub depth: u64,
    pub samples: u64,
    pub residual: f64,
    pub bootstrap_se: f64,
    pub resamples: u64,
}

/// Residual together with the standard deviation of the residual over
/// bootstrap resamples of the flag sample.
pub fn stationarity_bootstrap(
    spec: &MeasureSpec,
    flags: &[Flag],
    depth: u64,
    resamples: u64,
    seed: u64,
) -> Result<StationarityReport> {
    let t = CellTable::new(spec, flags, depth)?;
    let m = flags.len();
    let residual = t.residual(0..m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let boots: Vec<f64> = (0..resamples)
        .map(|_| {
            let idx: Vec<usize> = (0..m).map(|_| rng.gen_range(0..m)).collect();
            t.residual(idx.into_iter())
        })
        .collect();
    Ok(StationarityReport {
        depth,
        samples: m as u64,
        residual,
        bootstrap_se: mean_sd(&boots).1,
        resamples,
    })
}
