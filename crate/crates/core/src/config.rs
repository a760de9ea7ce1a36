//! TOML experiment configuration.
//!
//! Every section rejects unknown keys. [`ExperimentConfig::resolve`] fills
//! defaults that depend on other sections (the corner cutoff) and validates
//! the whole file, so the resolved form can be written next to the results
//! and re-run verbatim.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boundary::{enumerate_modes, BoundaryRegistry, BoundarySpec};
use crate::error::{Error, Result};
use crate::geometry::{WarpedMetric, DEFAULT_MAX_PSI_DEGREE};
use crate::goursat::CharGrid;
use crate::inequality::lemmas::QuadSpec;
use crate::profile::BumpSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub n: u32,
    /// Coefficients of `ψ` in powers of `x`.
    pub psi: Vec<f64>,
    pub eps: f64,
    #[serde(default = "default_max_degree")]
    pub max_degree: usize,
}

fn default_max_degree() -> usize {
    DEFAULT_MAX_PSI_DEGREE
}

impl MetricSpec {
    pub fn build(&self) -> Result<WarpedMetric> {
        WarpedMetric::with_max_degree(self.n, &self.psi, self.eps, self.max_degree)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "T")]
    pub t_max: f64,
    #[serde(rename = "N")]
    pub cells: usize,
    /// Pinned-corner radius `δ`; `4h` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner_cutoff: Option<f64>,
}

impl GridSpec {
    pub fn build(&self) -> Result<CharGrid> {
        CharGrid::new(self.t_max, self.cells, self.corner_cutoff)
    }
}

/// Radial profiles of one boundary eigenfunction branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeData {
    /// 1-based index into the distinct eigenvalues of the boundary model.
    pub k: usize,
    #[serde(default)]
    pub branch: usize,
    /// Initial displacement; zero when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<BumpSpec>,
    /// Initial velocity; zero when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<BumpSpec>,
}

impl ModeData {
    /// `inf{x : f₁ ≠ 0 or f₂ ≠ 0}`, or `None` for zero data.
    pub fn support_start(&self) -> Option<f64> {
        use crate::profile::Profile1D;
        [&self.f1, &self.f2]
            .into_iter()
            .flatten()
            .filter_map(|b| b.support())
            .map(|(lo, _)| lo)
            .min_by(f64::total_cmp)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(default)]
    pub modes: Vec<ModeData>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative level below which a field sample counts as vanishing.
    pub threshold: f64,
    /// Allowed overshoot of `μ*` past `x₁`, in grid steps.
    pub c_report: f64,
    /// Relative agreement required between pipeline and closed-form fields.
    pub field_rel: f64,
    /// `max|w + wᵀ|` allowed, as a multiple of the discrete residual.
    pub antisymmetry_factor: f64,
    /// Largest accepted change of a quadrature under panel doubling.
    pub quadrature_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { threshold: 1e-8, c_report: 2.0, field_rel: 1e-3, antisymmetry_factor: 10.0, quadrature_rel: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CarlemanSpec {
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub quad: QuadSpec,
}

impl Default for CarlemanSpec {
    fn default() -> Self {
        CarlemanSpec {
            lambdas: vec![0.0, 2.0, 6.0],
            gammas: vec![8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0, 128.0],
            quad: QuadSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaSpec {
    pub checks: Vec<String>,
    pub count: usize,
    #[serde(rename = "T")]
    pub t_max: f64,
    pub seed: u64,
    pub quad: QuadSpec,
}

impl Default for LemmaSpec {
    fn default() -> Self {
        LemmaSpec {
            checks: vec!["bound0".into(), "decay".into(), "fubini".into()],
            count: 100,
            t_max: 1.0,
            seed: 0,
            quad: QuadSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSpec {
    pub sizes: Vec<usize>,
    pub lambda: f64,
    /// Accepted band for every observed order.
    pub order_min: f64,
    pub order_max: f64,
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        ConvergenceSpec { sizes: vec![32, 64, 128], lambda: 0.0, order_min: 1.8, order_max: 2.2 }
    }
}

/// Extra diagnostics attached to `solve`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSpec {
    /// Dump every solution grid as `mu,nu,w`.
    pub dump_solutions: bool,
    /// `γ` values for the cutoff squeeze; skipped when empty.
    pub vanishing_gammas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Subcommand this file is meant for; checked against the one invoked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    pub metric: MetricSpec,
    pub boundary: BoundarySpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub solve: SolveSpec,
    #[serde(default)]
    pub carleman: CarlemanSpec,
    #[serde(default)]
    pub lemma: LemmaSpec,
    #[serde(default)]
    pub convergence: ConvergenceSpec,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {v} must be positive and finite")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Validates every section and fills derived defaults.
    pub fn resolve(mut self) -> Result<Self> {
        let metric = self.metric.build()?;
        let grid = self.grid.build()?;
        grid.check_patch(metric.eps())?;
        self.grid.corner_cutoff = Some(grid.cutoff());

        let model = BoundaryRegistry::default().build(&self.boundary)?;
        let modes = enumerate_modes(model.as_ref(), self.boundary.lambda_max);
        for (idx, m) in self.data.modes.iter().enumerate() {
            let mode = modes.iter().find(|e| e.k == m.k).ok_or_else(|| {
                Error::Config(format!(
                    "data.modes[{idx}]: mode k = {} is not below lambda_max = {} ({} modes)",
                    m.k,
                    self.boundary.lambda_max,
                    modes.len()
                ))
            })?;
            if m.branch >= mode.multiplicity {
                return Err(Error::Config(format!(
                    "data.modes[{idx}]: branch {} but mode k = {} has multiplicity {}",
                    m.branch, m.k, mode.multiplicity
                )));
            }
            for b in [&m.f1, &m.f2].into_iter().flatten() {
                b.validate()?;
            }
        }
        let mut seen: Vec<(usize, usize)> = self.data.modes.iter().map(|m| (m.k, m.branch)).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("data.modes lists the same (k, branch) twice".into()));
        }

        let t = &self.tolerances;
        positive("tolerances.threshold", t.threshold)?;
        positive("tolerances.field_rel", t.field_rel)?;
        positive("tolerances.antisymmetry_factor", t.antisymmetry_factor)?;
        positive("tolerances.quadrature_rel", t.quadrature_rel)?;
        if !(t.c_report.is_finite() && t.c_report >= 0.0) {
            return Err(Error::Config(format!("tolerances.c_report = {} must be nonnegative", t.c_report)));
        }

        if self.solve.vanishing_gammas.iter().any(|&g| !(g.is_finite() && g >= 1.0)) {
            return Err(Error::Config("solve.vanishing_gammas must all be at least 1".into()));
        }

        let c = &self.carleman;
        c.quad.validate()?;
        if c.lambdas.iter().any(|&l| !(l.is_finite() && l >= 0.0)) {
            return Err(Error::Config("carleman.lambdas must be nonnegative".into()));
        }
        if c.gammas.iter().any(|&g| !(g.is_finite() && g >= 1.0)) {
            return Err(Error::Config("carleman.gammas must all be at least 1".into()));
        }

        let l = &self.lemma;
        l.quad.validate()?;
        positive("lemma.T", l.t_max)?;
        if l.count == 0 {
            return Err(Error::Config("lemma.count must be positive".into()));
        }

        let cv = &self.convergence;
        if cv.sizes.len() < 2 || cv.sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("convergence.sizes needs at least two increasing grid sizes".into()));
        }
        if !(cv.lambda.is_finite() && cv.lambda >= 0.0) {
            return Err(Error::Config(format!("convergence.lambda = {} must be nonnegative", cv.lambda)));
        }
        if !(cv.order_min <= cv.order_max) {
            return Err(Error::Config("convergence.order_min exceeds order_max".into()));
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EUCLIDEAN: &str = r#"
        [metric]
        n = 3
        psi = [1.0]
        eps = 2.4

        [boundary]
        kind = "round-sphere-2"
        lambda_max = 0.0

        [grid]
        T = 1.2
        N = 64

        [[data.modes]]
        k = 1
        f2 = { lo = 0.5, hi = 1.0, width = 0.25 }
    "#;

    #[test]
    fn resolves_and_round_trips() {
        let cfg = ExperimentConfig::from_toml(EUCLIDEAN).unwrap().resolve().unwrap();
        assert_eq!(cfg.grid.corner_cutoff, Some(4.0 * 1.2 / 64.0));
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap().resolve().unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = EUCLIDEAN.replace("eps = 2.4", "eps = 2.4\nwarp = 1");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_bad_psi_and_modes() {
        let text = EUCLIDEAN.replace("psi = [1.0]", "psi = [2.0]");
        let err = ExperimentConfig::from_toml(&text).unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("psi(0) must equal 1"));
        assert_eq!(err.exit_code(), 2);

        let text = EUCLIDEAN.replace("k = 1", "k = 2");
        assert!(ExperimentConfig::from_toml(&text).unwrap().resolve().is_err());
    }
}
