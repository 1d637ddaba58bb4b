//! Batch experiment runner behind the `btwalk` binary.
//!
//! Every command reads an [`ExperimentConfig`], fans trajectories out over a
//! rayon pool of the requested size and merges results by trajectory id, so
//! artifacts do not depend on the worker count.

mod check;
mod config;
mod demo;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use check::{self_check, CheckReport, SuiteResult};
pub use config::ExperimentConfig;
pub use demo::tree_demo;

use crate::error::Error;
use crate::padic::format_rational;
use crate::random_walk::{
    lyapunov_from_types, opposition_from_limits, stationarity_bootstrap, summarize_paths, MeasureSpec, PathSummary,
    Walk,
};

/// Bootstrap resamples for the stationarity residual.
const RESAMPLES: u64 = 200;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Math(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("self-check failed")]
    CheckFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Math(_) => 3,
            CliError::Io(_) | CliError::CheckFailed => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Walk,
    Lyapunov,
    Opposition,
    Stationary,
    Germ,
    TreeDemo,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Walk => "walk",
            Command::Lyapunov => "lyapunov",
            Command::Opposition => "opposition",
            Command::Stationary => "stationary",
            Command::Germ => "germ",
            Command::TreeDemo => "tree-demo",
            Command::Check => "check",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Artifact directory; overrides the config's `out_dir`.
    pub out_dir: Option<PathBuf>,
    /// Worker threads; 0 lets rayon decide.
    pub workers: usize,
}

/// Runs one command. Reports go to `stdout`; with an output directory the
/// same reports plus CSV series are written there.
pub fn run_experiment(
    config: &ExperimentConfig,
    command: Command,
    opts: &RunOptions,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let out_dir = opts.out_dir.clone().or_else(|| config.out_dir.clone());
    if let Some(dir) = &out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let sink = Sink {
        dir: out_dir.as_deref(),
        pool: &pool,
    };
    match command {
        Command::Walk => walk(config, &sink, stdout),
        Command::Lyapunov => lyapunov(config, &sink, stdout),
        Command::Opposition => opposition(config, &sink, stdout),
        Command::Stationary => stationary(config, &sink, stdout),
        Command::Germ => germ(config, &sink, stdout),
        Command::TreeDemo => {
            let report = tree_demo(config.prime)?;
            sink.report("tree_demo.json", &report, stdout)
        }
        Command::Check => {
            let report = self_check(config.prime, config.seed);
            sink.report("check.json", &report, stdout)?;
            if report.passed {
                Ok(())
            } else {
                Err(CliError::CheckFailed)
            }
        }
    }
}

struct Sink<'a> {
    dir: Option<&'a Path>,
    pool: &'a rayon::ThreadPool,
}

impl Sink<'_> {
    fn report<T: Serialize>(&self, name: &str, value: &T, stdout: &mut dyn Write) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        if let Some(dir) = self.dir {
            std::fs::write(dir.join(name), &text)?;
        }
        stdout.write_all(text.as_bytes())?;
        Ok(())
    }

    fn csv(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        let Some(dir) = self.dir else {
            return Ok(());
        };
        let mut w = csv::Writer::from_path(dir.join(name)).map_err(csv_err)?;
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(&r).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

fn ids(config: &ExperimentConfig) -> Vec<u64> {
    (0..config.trajectories).collect()
}

fn summaries(config: &ExperimentConfig, sink: &Sink, spec: &MeasureSpec, ids: &[u64]) -> Vec<PathSummary> {
    sink.pool
        .install(|| summarize_paths(spec, config.steps, ids, config.tolerance_exponent, &[]))
}

fn walk(config: &ExperimentConfig, sink: &Sink, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = config.spec()?;
    let mut jsonl: Box<dyn Write + '_> = match sink.dir {
        Some(dir) => Box::new(BufWriter::new(File::create(dir.join("walk.jsonl"))?)),
        None => Box::new(&mut *stdout),
    };
    let mut series = match sink.dir {
        Some(dir) => {
            let mut w = csv::Writer::from_path(dir.join("walk.csv")).map_err(csv_err)?;
            w.write_record(["traj", "n", "theta_1", "theta_2", "theta_3", "step_sq", "gap_exp"])
                .map_err(csv_err)?;
            Some(w)
        }
        None => None,
    };
    let ids = ids(config);
    let chunk = 4 * sink.pool.current_num_threads().max(1);
    for block in ids.chunks(chunk) {
        let paths: Vec<_> = sink.pool.install(|| {
            block
                .par_iter()
                .map(|&t| Walk::new(&spec, t, config.steps).collect::<Vec<_>>())
                .collect()
        });
        for rec in paths.iter().flatten() {
            serde_json::to_writer(&mut jsonl, rec).map_err(|e| CliError::Io(e.into()))?;
            jsonl.write_all(b"\n")?;
            if let Some(w) = series.as_mut() {
                let [a, b, c] = rec.theta.coords().clone().map(|x| format_rational(&x));
                let gap = match rec.flag_gap {
                    Some(g) => g.exponent.map_or("inf".to_string(), |e| e.to_string()),
                    None => String::new(),
                };
                w.write_record([
                    rec.traj.to_string(),
                    rec.n.to_string(),
                    a,
                    b,
                    c,
                    format_rational(&rec.step_sq),
                    gap,
                ])
                .map_err(csv_err)?;
            }
        }
    }
    jsonl.flush()?;
    if let Some(mut w) = series {
        w.flush()?;
    }
    Ok(())
}

fn summary_rows(sums: &[PathSummary]) -> impl Iterator<Item = Vec<String>> + '_ {
    sums.iter().map(|s| {
        let [a, b, c] = s.theta.coords().clone().map(|x| format_rational(&x));
        vec![
            s.traj.to_string(),
            a,
            b,
            c,
            s.limit.flag().is_some().to_string(),
            s.germ.index.map_or(String::new(), |i| i.to_string()),
            s.germ.matches.to_string(),
            s.last_return.to_string(),
        ]
    })
}

const SUMMARY_HEADER: [&str; 8] = [
    "traj",
    "theta_1",
    "theta_2",
    "theta_3",
    "converged",
    "germ_index",
    "germ_matches",
    "last_return",
];

fn lyapunov(config: &ExperimentConfig, sink: &Sink, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = config.spec()?;
    let sums = summaries(config, sink, &spec, &ids(config));
    let types: Vec<_> = sums.iter().map(|s| s.theta.clone()).collect();
    let report = lyapunov_from_types(&types, config.steps)?;
    sink.csv("lyapunov.csv", &SUMMARY_HEADER, summary_rows(&sums))?;
    sink.report("lyapunov.json", &report, stdout)
}

fn opposition(config: &ExperimentConfig, sink: &Sink, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = config.spec()?;
    let ids: Vec<u64> = (0..2 * config.trajectories).collect();
    let sums = summaries(config, sink, &spec, &ids);
    let limits: Vec<_> = sums.chunks(2).map(|c| (c[0].limit.flag(), c[1].limit.flag())).collect();
    let report = opposition_from_limits(&limits);
    let rows = sums.chunks(2).enumerate().map(|(i, c)| {
        let state = match (c[0].limit.flag(), c[1].limit.flag()) {
            (Some(a), Some(b)) => a.is_opposite(b).to_string(),
            _ => "skipped".to_string(),
        };
        vec![i.to_string(), c[0].traj.to_string(), c[1].traj.to_string(), state]
    });
    sink.csv("opposition.csv", &["pair", "traj_a", "traj_b", "opposite"], rows)?;
    sink.report("opposition.json", &report, stdout)
}

#[derive(Serialize)]
struct StationaryOutput {
    trajectories: u64,
    converged: u64,
    reports: Vec<crate::random_walk::StationarityReport>,
}

fn stationary(config: &ExperimentConfig, sink: &Sink, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = config.spec()?;
    let sums = summaries(config, sink, &spec, &ids(config));
    let flags: Vec<_> = sums.iter().filter_map(|s| s.limit.flag().cloned()).collect();
    let reports = sink.pool.install(|| {
        (1..=config.germ_depth)
            .into_par_iter()
            .map(|k| stationarity_bootstrap(&spec, &flags, k, RESAMPLES, config.seed))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let rows = reports.iter().map(|r| {
        vec![
            r.depth.to_string(),
            r.samples.to_string(),
            r.residual.to_string(),
            r.bootstrap_se.to_string(),
        ]
    });
    sink.csv("stationary.csv", &["depth", "samples", "residual", "bootstrap_se"], rows)?;
    let out = StationaryOutput {
        trajectories: config.trajectories,
        converged: flags.len() as u64,
        reports,
    };
    sink.report("stationary.json", &out, stdout)
}

#[derive(Serialize)]
struct Bucket {
    from: u64,
    to: u64,
    count: u64,
    matching: u64,
}

#[derive(Serialize)]
struct GermOutput {
    trajectories: u64,
    stabilized: u64,
    matching: u64,
    /// Germ indices binned into [2^j, 2^{j+1}).
    histogram: Vec<Bucket>,
}

fn germ(config: &ExperimentConfig, sink: &Sink, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = config.spec()?;
    let sums = summaries(config, sink, &spec, &ids(config));
    let mut bins: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
    for s in &sums {
        if let Some(i) = s.germ.index {
            let e = bins.entry(i.ilog2()).or_default();
            e.0 += 1;
            e.1 += s.germ.matches as u64;
        }
    }
    let histogram: Vec<Bucket> = bins
        .into_iter()
        .map(|(j, (count, matching))| Bucket {
            from: 1 << j,
            to: 1 << (j + 1),
            count,
            matching,
        })
        .collect();
    sink.csv(
        "germ.csv",
        &["from", "to", "count", "matching"],
        histogram
            .iter()
            .map(|b| vec![b.from.to_string(), b.to.to_string(), b.count.to_string(), b.matching.to_string()]),
    )?;
    sink.csv("germ_paths.csv", &SUMMARY_HEADER, summary_rows(&sums))?;
    let out = GermOutput {
        trajectories: config.trajectories,
        stabilized: histogram.iter().map(|b| b.count).sum(),
        matching: histogram.iter().map(|b| b.matching).sum(),
        histogram,
    };
    sink.report("germ.json", &out, stdout)
}
