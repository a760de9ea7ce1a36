//! Experiments that run the quadrature inequality checks.

use std::io::Write;

use serde::Serialize;

use super::{csv_bytes, Artifact, Experiment, ExperimentOutput};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::inequality::carleman::{carleman_sweep, default_corpus, write_sweep_csv, LambdaSummary};
use crate::inequality::{LemmaContext, LemmaRegistry, LemmaSummary};

#[derive(Debug, Serialize)]
struct SweepReport {
    per_lambda: Vec<LambdaSummary>,
    gamma0_monotone: bool,
    min_c: f64,
    max_rel_change: f64,
    functions: Vec<String>,
}

#[derive(Debug, Default)]
pub struct CarlemanSweepExperiment;

impl Experiment for CarlemanSweepExperiment {
    fn name(&self) -> &'static str {
        "carleman-sweep"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
        let coeffs = cfg.metric.build()?.derive_coefficients();
        let corpus = default_corpus();
        let c = &cfg.carleman;
        let sweep = carleman_sweep(&coeffs, &c.lambdas, &c.gammas, &corpus, &c.quad)?;
        let report = SweepReport {
            min_c: sweep.per_lambda.iter().map(|l| l.c).fold(f64::INFINITY, f64::min),
            max_rel_change: sweep.points.iter().map(|p| p.terms.rel_change).fold(0.0, f64::max),
            per_lambda: sweep.per_lambda.clone(),
            gamma0_monotone: sweep.gamma0_monotone,
            functions: corpus.iter().map(crate::inequality::TestFunction2D::label).collect(),
        };
        let pass = report.min_c > 0.0
            && report.gamma0_monotone
            && report.max_rel_change <= cfg.tolerances.quadrature_rel;
        let bytes = csv_bytes(|w| write_sweep_csv(&sweep, w))?;
        ExperimentOutput::new(pass, &report, vec![Artifact { name: "carleman.csv".into(), bytes }])
    }
}

#[derive(Debug, Serialize)]
struct LemmaOverview<'a> {
    name: &'a str,
    cases: usize,
    passed: usize,
    worst_ratio: f64,
    worst_alt_ratio: Option<f64>,
    max_rel_change: f64,
}

#[derive(Debug, Default)]
pub struct LemmaCheckExperiment;

impl Experiment for LemmaCheckExperiment {
    fn name(&self) -> &'static str {
        "lemma-check"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
        let registry = LemmaRegistry::default();
        let l = &cfg.lemma;
        let ctx = LemmaContext { t_max: l.t_max, count: l.count, seed: l.seed, quad: l.quad };
        let summaries: Vec<LemmaSummary> =
            l.checks.iter().map(|name| registry.get(name)?.run(&ctx)).collect::<Result<_>>()?;
        let quad_tol = cfg.tolerances.quadrature_rel;
        let pass = summaries.iter().all(|s| s.all_pass() && s.max_rel_change <= quad_tol);
        let overview: Vec<LemmaOverview> = summaries
            .iter()
            .map(|s| LemmaOverview {
                name: &s.name,
                cases: s.cases,
                passed: s.passed,
                worst_ratio: s.worst_ratio,
                worst_alt_ratio: s.worst_alt_ratio,
                max_rel_change: s.max_rel_change,
            })
            .collect();
        let bytes = csv_bytes(|w| {
            writeln!(w, "lemma,param,function,lhs,rhs,ratio,pass,rel_change,alt_ratio")?;
            for s in &summaries {
                for r in &s.records {
                    let alt = r.alt_ratio.map_or(String::new(), |a| format!("{a:.16e}"));
                    writeln!(
                        w,
                        "{},\"{}\",\"{}\",{:.16e},{:.16e},{:.16e},{},{:.16e},{alt}",
                        s.name, r.param, r.function, r.lhs, r.rhs, r.ratio, r.pass, r.rel_change
                    )?;
                }
            }
            Ok(())
        })?;
        let summary = serde_json::json!({ "seed": l.seed, "count": l.count, "checks": overview });
        ExperimentOutput::new(pass, &summary, vec![Artifact { name: "lemmas.csv".into(), bytes }])
    }
}
