//! Experiments selectable by subcommand, and the runner that resolves a
//! configuration, executes one experiment and writes its artifacts.
//!
//! Everything an experiment emits as CSV depends only on the resolved
//! configuration; the wall time lives in the JSON report alone.

mod checks;
pub mod pipeline;
mod solvers;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

pub use checks::{CarlemanSweepExperiment, LemmaCheckExperiment};
pub use solvers::{manufactured_study, Convergence, ConvergenceRow, OracleCompare, Solve, VerifySupport};

/// A named output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub pass: bool,
    pub summary: serde_json::Value,
    pub artifacts: Vec<Artifact>,
}

impl ExperimentOutput {
    pub fn new<S: Serialize>(pass: bool, summary: &S, artifacts: Vec<Artifact>) -> Result<Self> {
        let summary = serde_json::to_value(summary).map_err(|e| Error::Numerical(format!("unserialisable summary: {e}")))?;
        Ok(ExperimentOutput { pass, summary, artifacts })
    }
}

pub(crate) fn csv_bytes<F>(write: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

pub trait Experiment: Send + Sync {
    /// Subcommand name.
    fn name(&self) -> &'static str;

    /// Expects a resolved configuration.
    fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput>;
}

pub struct ExperimentRegistry {
    experiments: BTreeMap<&'static str, Box<dyn Experiment>>,
}

impl ExperimentRegistry {
    pub fn empty() -> Self {
        ExperimentRegistry { experiments: BTreeMap::new() }
    }

    pub fn register(&mut self, experiment: Box<dyn Experiment>) {
        self.experiments.insert(experiment.name(), experiment);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.experiments.keys().copied()
    }

    pub fn get(&self, name: &str) -> Result<&dyn Experiment> {
        self.experiments.get(name).map(|e| e.as_ref()).ok_or_else(|| {
            Error::Config(format!(
                "unknown experiment '{name}' (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })
    }
}

impl Default for ExperimentRegistry {
    fn default() -> Self {
        let mut r = ExperimentRegistry::empty();
        r.register(Box::new(Solve));
        r.register(Box::new(VerifySupport));
        r.register(Box::new(OracleCompare));
        r.register(Box::new(Convergence));
        r.register(Box::new(CarlemanSweepExperiment));
        r.register(Box::new(LemmaCheckExperiment));
        r
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub experiment: String,
    /// `PASS` or `FAIL`.
    pub verdict: String,
    /// SHA-256 of `resolved_config`.
    pub config_sha256: String,
    pub wall_time_seconds: f64,
    pub summary: serde_json::Value,
    pub artifacts: Vec<String>,
    pub resolved_config: String,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.verdict == "PASS"
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Resolves `cfg`, runs experiment `name`, and writes
/// `resolved_config.toml`, every artifact and `report.json` into `out_dir`.
pub fn run_experiment(
    registry: &ExperimentRegistry,
    name: &str,
    cfg: ExperimentConfig,
    out_dir: Option<&Path>,
) -> Result<RunReport> {
    let experiment = registry.get(name)?;
    if let Some(declared) = cfg.experiment.as_deref() {
        if declared != name {
            return Err(Error::Config(format!("config is for experiment '{declared}', not '{name}'")));
        }
    }
    let mut cfg = cfg.resolve()?;
    cfg.experiment = Some(name.to_string());
    let resolved = cfg.to_toml()?;
    let config_sha256 = hex(&Sha256::digest(resolved.as_bytes()));

    let start = Instant::now();
    let output = experiment.run(&cfg)?;
    let wall_time_seconds = start.elapsed().as_secs_f64();
    log::info!("{name}: {} in {wall_time_seconds:.2} s", if output.pass { "PASS" } else { "FAIL" });

    let report = RunReport {
        experiment: name.to_string(),
        verdict: if output.pass { "PASS" } else { "FAIL" }.into(),
        config_sha256,
        wall_time_seconds,
        summary: output.summary,
        artifacts: output.artifacts.iter().map(|a| a.name.clone()).collect(),
        resolved_config: resolved,
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("resolved_config.toml"), &report.resolved_config)?;
        for a in &output.artifacts {
            std::fs::write(dir.join(&a.name), &a.bytes)?;
        }
        let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Numerical(e.to_string()))?;
        std::fs::write(dir.join("report.json"), json + "\n")?;
    }
    Ok(report)
}
