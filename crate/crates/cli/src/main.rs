//! `radfield` command line: one subcommand per experiment, each driven by a
//! TOML configuration.
//!
//! Exit codes: 0 pass, 1 verdict fail, 2 invalid configuration, 3 numerical
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use radfield::config::ExperimentConfig;
use radfield::experiment::{run_experiment, ExperimentRegistry};
use radfield::Error;

#[derive(Debug, Parser)]
#[command(name = "radfield", version, about = "Radiation fields and support-theorem experiments on warped-product ends")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; defaults to `out/<subcommand>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for random test-function corpora; overrides `lemma.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Solve every configured mode and report residuals and symmetry.
    Solve,
    /// Compare the field threshold with the data support.
    VerifySupport,
    /// Weighted-estimate ratios over a gamma and eigenvalue sweep.
    CarlemanSweep,
    /// Random-corpus checks of the elementary inequalities.
    LemmaCheck,
    /// Manufactured-solution convergence study.
    Convergence,
    /// Pipeline field against the flat closed form.
    OracleCompare,
}

impl Command {
    fn experiment(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::VerifySupport => "verify-support",
            Command::CarlemanSweep => "carleman-sweep",
            Command::LemmaCheck => "lemma-check",
            Command::Convergence => "convergence",
            Command::OracleCompare => "oracle-compare",
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let name = cli.command.experiment();
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?;
    }
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.lemma.seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out").join(name));
    let report = run_experiment(&ExperimentRegistry::default(), name, cfg, Some(&out))?;
    println!("{name}: {} ({:.2} s), artifacts in {}", report.verdict, report.wall_time_seconds, out.display());
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
