//! Experiments backed by the characteristic solver.

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use super::pipeline::{solve_modes, Antisymmetry, Pipeline};
use super::{csv_bytes, Artifact, Experiment, ExperimentOutput};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::euclidean::{lax_phillips_compare, radiation_field_radial, LaxPhillipsReport, RadialProfile};
use crate::geometry::x_of;
use crate::goursat::{discrete_residual, solve_mode, CoefficientTable, DiagonalData};
use crate::inequality::energy::{check_energy, EnergyReport};
use crate::inequality::vanishing::{vanishing_demo_solution, VanishingReport};
use crate::radiation::{
    combine_thresholds, edge_vanishing, judge_support, odd_symmetry_defect, support_threshold, write_fields_csv,
    EdgeVanishing, RadiationField, SupportVerdict, Threshold, Verdict,
};

fn fields_artifact(p: &Pipeline) -> Result<Artifact> {
    let fields: Vec<RadiationField> =
        p.modes.iter().flat_map(|m| [m.forward.clone(), m.backward.clone()]).collect();
    Ok(Artifact { name: "fields.csv".into(), bytes: csv_bytes(|w| write_fields_csv(&fields, w))? })
}

#[derive(Debug, Serialize)]
struct SolveModeSummary {
    k: usize,
    branch: usize,
    lambda: f64,
    odd: bool,
    max_abs: f64,
    pinned: usize,
    residual_max: f64,
    residual_l2: f64,
    residual_scale: f64,
    antisymmetry: Antisymmetry,
    odd_field_defect: f64,
    energy: EnergyReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    vanishing: Option<VanishingReport>,
}

/// Solves every configured mode and reports residuals, symmetry and energy.
#[derive(Debug, Default)]
pub struct Solve;

impl Experiment for Solve {
    fn name(&self) -> &'static str {
        "solve"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
        let p = solve_modes(cfg)?;
        let factor = cfg.tolerances.antisymmetry_factor;
        let mut per_mode = Vec::with_capacity(p.modes.len());
        let mut artifacts = vec![fields_artifact(&p)?];
        for m in &p.modes {
            let vanishing = if cfg.solve.vanishing_gammas.is_empty() {
                None
            } else {
                Some(vanishing_demo_solution(&m.solution, &p.coeffs, &cfg.solve.vanishing_gammas)?)
            };
            per_mode.push(SolveModeSummary {
                k: m.k,
                branch: m.branch,
                lambda: m.lambda,
                odd: m.odd,
                max_abs: m.solution.max_abs(),
                pinned: m.solution.pinned,
                residual_max: m.residual.max,
                residual_l2: m.residual.l2,
                residual_scale: m.residual.scale,
                antisymmetry: m.antisymmetry(factor),
                odd_field_defect: if m.odd { odd_symmetry_defect(&m.forward, &m.backward) } else { 0.0 },
                energy: check_energy(&m.solution, &m.data)?,
                vanishing,
            });
            if cfg.solve.dump_solutions {
                artifacts.push(Artifact {
                    name: format!("solution_k{}_b{}.csv", m.k, m.branch),
                    bytes: csv_bytes(|w| m.solution.write_csv(w))?,
                });
            }
        }
        let pass = per_mode.iter().all(|s| s.antisymmetry.pass && s.residual_max.is_finite());
        ExperimentOutput::new(pass, &serde_json::json!({ "per_mode": per_mode }), artifacts)
    }
}

#[derive(Debug, Serialize)]
struct SupportModeSummary {
    k: usize,
    branch: usize,
    lambda: f64,
    x1: Option<f64>,
    threshold: Threshold,
    edge_vanishing: EdgeVanishing,
    antisymmetry: Antisymmetry,
}

#[derive(Debug, Serialize)]
struct SupportReport {
    x1: Option<f64>,
    mu_star: f64,
    h: f64,
    verdict: Verdict,
    support: SupportVerdict,
    per_mode: Vec<SupportModeSummary>,
}

/// Both directions of the support equivalence on the combined field.
#[derive(Debug, Default)]
pub struct VerifySupport;

impl Experiment for VerifySupport {
    fn name(&self) -> &'static str {
        "verify-support"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
        let p = solve_modes(cfg)?;
        let tol = cfg.tolerances.threshold;
        let thresholds: Vec<Threshold> = p.modes.iter().map(|m| support_threshold(&m.forward, tol)).collect();
        let combined = combine_thresholds(&thresholds).ok_or_else(|| Error::Config("no modes to combine".into()))?;
        let x1 = p.modes.iter().filter_map(|m| m.x1).min_by(f64::total_cmp);
        let support = judge_support(x1, &combined, cfg.tolerances.c_report);
        let per_mode: Vec<SupportModeSummary> = p
            .modes
            .iter()
            .zip(&thresholds)
            .map(|(m, t)| SupportModeSummary {
                k: m.k,
                branch: m.branch,
                lambda: m.lambda,
                x1: m.x1,
                threshold: *t,
                edge_vanishing: edge_vanishing(&m.solution, t, tol.sqrt()),
                antisymmetry: m.antisymmetry(cfg.tolerances.antisymmetry_factor),
            })
            .collect();
        let pass = support.verdict != Verdict::Fail && per_mode.iter().all(|m| m.antisymmetry.pass);
        let report = SupportReport { x1, mu_star: support.mu_star, h: support.h, verdict: support.verdict, support, per_mode };
        ExperimentOutput::new(pass, &report, vec![fields_artifact(&p)?])
    }
}

#[derive(Debug, Serialize)]
struct OracleReport {
    max_rel_error: f64,
    tolerance: f64,
    x1: f64,
    threshold: Threshold,
    threshold_within_h: bool,
    antisymmetry: Antisymmetry,
    lax_phillips: LaxPhillipsReport,
}

/// Pipeline field against the closed-form field of the flat three-dimensional
/// case.
#[derive(Debug, Default)]
pub struct OracleCompare;

impl Experiment for OracleCompare {
    fn name(&self) -> &'static str {
        "oracle-compare"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
        if cfg.metric.n != 3 || cfg.metric.psi.iter().skip(1).any(|&c| c != 0.0) {
            return Err(Error::Config("oracle-compare needs n = 3 and psi = [1.0]".into()));
        }
        let [mode] = cfg.data.modes.as_slice() else {
            return Err(Error::Config("oracle-compare needs exactly one data mode".into()));
        };
        let (None, Some(bump)) = (&mode.f1, &mode.f2) else {
            return Err(Error::Config("oracle-compare needs velocity data only (f2 set, f1 absent)".into()));
        };
        let p = solve_modes(cfg)?;
        let m = &p.modes[0];
        if m.lambda != 0.0 {
            return Err(Error::Config(format!("oracle-compare needs the radial mode, got lambda = {}", m.lambda)));
        }
        let radial = RadialProfile::from_x_profile(Arc::new(bump.clone()));
        let exact: Vec<f64> = m.forward.samples.iter().map(|s| radiation_field_radial(&radial, s.s)).collect();
        let peak = exact.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let err = m.forward.samples.iter().zip(&exact).map(|(s, e)| (s.value - e).abs()).fold(0.0, f64::max);
        let max_rel_error = if peak > 0.0 { err / peak } else { err };
        let threshold = support_threshold(&m.forward, cfg.tolerances.threshold);
        let x1 = bump.lo;
        let threshold_within_h = (threshold.mu_star - x1).abs() <= threshold.h * (1.0 + 1e-9);
        let report = OracleReport {
            max_rel_error,
            tolerance: cfg.tolerances.field_rel,
            x1,
            threshold,
            threshold_within_h,
            antisymmetry: m.antisymmetry(cfg.tolerances.antisymmetry_factor),
            lax_phillips: lax_phillips_compare(&radial, 64)?,
        };
        let bytes = csv_bytes(|w| {
            writeln!(w, "s,mu,pipeline,oracle")?;
            for (s, e) in m.forward.samples.iter().zip(&exact) {
                writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", s.s, s.coord, s.value, e)?;
            }
            Ok(())
        })?;
        let pass = max_rel_error <= report.tolerance && threshold_within_h && report.antisymmetry.pass;
        ExperimentOutput::new(pass, &report, vec![Artifact { name: "oracle.csv".into(), bytes }])
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub h: f64,
    pub max_error: f64,
    pub residual_max: f64,
    /// `log₂` of the error ratio to the previous row.
    pub order: Option<f64>,
}

/// Manufactured solution `w = μ²ν²` with the matching forcing.
pub fn manufactured_study(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRow>> {
    let coeffs = cfg.metric.build()?.derive_coefficients();
    let lambda = cfg.convergence.lambda;
    let forcing_coeffs = coeffs.clone();
    let forcing = move |mu: f64, nu: f64| {
        let r = mu + nu;
        r * r * 4.0 * mu * nu - forcing_coeffs.mode_potential(lambda, x_of(mu, nu)) * mu * mu * nu * nu
    };
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(cfg.convergence.sizes.len());
    for &cells in &cfg.convergence.sizes {
        let grid = crate::goursat::CharGrid::new(cfg.grid.t_max, cells, None)?;
        let table = CoefficientTable::new(&coeffs, lambda, &grid)?;
        let data = DiagonalData::from_fns(&grid, |m| m.powi(4), |m| 2.0 * m.powi(3));
        let sol = solve_mode(&table, &data, Some(&forcing))?;
        let mut max_error: f64 = 0.0;
        for i in 0..=cells {
            for j in 0..=cells {
                let exact = (grid.node(i) * grid.node(j)).powi(2);
                max_error = max_error.max((sol.at(i, j) - exact).abs());
            }
        }
        let residual = discrete_residual(&sol, &coeffs, lambda, Some(&forcing));
        let order = rows.last().map(|prev| (prev.max_error / max_error).log2());
        rows.push(ConvergenceRow {
            cells,
            h: grid.h(),
            max_error,
            residual_max: residual.max,
            order,
        });
    }
    Ok(rows)
}

#[derive(Debug, Default)]
pub struct Convergence;

impl Experiment for Convergence {
    fn name(&self) -> &'static str {
        "convergence"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
        let rows = manufactured_study(cfg)?;
        let (lo, hi) = (cfg.convergence.order_min, cfg.convergence.order_max);
        let pass = rows.iter().filter_map(|r| r.order).all(|o| o >= lo && o <= hi);
        let bytes = csv_bytes(|w| {
            writeln!(w, "N,h,max_error,residual_max,order")?;
            for r in &rows {
                let order = r.order.map_or(String::new(), |o| format!("{o:.16e}"));
                writeln!(w, "{},{:.16e},{:.16e},{:.16e},{order}", r.cells, r.h, r.max_error, r.residual_max)?;
            }
            Ok(())
        })?;
        let summary = serde_json::json!({ "rows": rows, "order_band": [lo, hi] });
        ExperimentOutput::new(pass, &summary, vec![Artifact { name: "convergence.csv".into(), bytes }])
    }
}
