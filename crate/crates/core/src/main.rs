use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use btwalk::cli::{run_experiment, Command, ExperimentConfig, RunOptions};

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    /// Stream per-step records as JSONL.
    Walk,
    /// Estimate the Lyapunov vector.
    Lyapunov,
    /// Rate of opposite limit flags over independent pairs.
    Opposition,
    /// Stationarity residuals of the limit-flag sample.
    Stationary,
    /// Germ stabilization histogram.
    Germ,
    /// Panel-tree worked examples.
    TreeDemo,
    /// Exact oracle self-test.
    Check,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Walk => Command::Walk,
            Cmd::Lyapunov => Command::Lyapunov,
            Cmd::Opposition => Command::Opposition,
            Cmd::Stationary => Command::Stationary,
            Cmd::Germ => Command::Germ,
            Cmd::TreeDemo => Command::TreeDemo,
            Cmd::Check => Command::Check,
        }
    }
}

#[derive(Parser)]
#[command(name = "btwalk", version, about = "Random walks on the SL3 building over Q_p")]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory for reports and CSV series.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, env = "BTWALK_SEED")]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut config = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("btwalk: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let opts = RunOptions {
        out_dir: cli.out,
        workers: cli.workers,
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let result = run_experiment(&config, cli.command.into(), &opts, &mut lock);
    let _ = lock.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("btwalk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
