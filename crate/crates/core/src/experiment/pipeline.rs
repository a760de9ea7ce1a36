//! Metric, grid and per-mode solves shared by the solver-backed experiments.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{enumerate_modes, BoundaryRegistry};
use crate::config::{ExperimentConfig, ModeData};
use crate::error::{Error, Result};
use crate::geometry::DerivedCoefficients;
use crate::goursat::{
    build_diagonal_data, discrete_residual, solve_mode, CharGrid, CoefficientTable, DiagonalData, ModeSolution,
    ResidualNorms,
};
use crate::profile::{Profile1D, ZeroProfile};
use crate::radiation::{extract_field, Direction, RadiationField};

#[derive(Debug, Clone)]
pub struct SolvedMode {
    pub k: usize,
    pub branch: usize,
    pub lambda: f64,
    /// `f₁ ≡ 0`: the solution is odd in time.
    pub odd: bool,
    pub x1: Option<f64>,
    pub data: DiagonalData,
    pub solution: ModeSolution,
    pub forward: RadiationField,
    pub backward: RadiationField,
    pub residual: ResidualNorms,
}

impl SolvedMode {
    /// `max|w + wᵀ| ≤ factor·residual`, up to a few ulps of `max|w|`.
    pub fn antisymmetry(&self, factor: f64) -> Antisymmetry {
        let defect = self.solution.antisymmetry_defect();
        let allowed = factor * self.residual.max + 4.0 * f64::EPSILON * self.solution.max_abs();
        Antisymmetry { defect, residual: self.residual.max, pass: !self.odd || defect <= allowed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Antisymmetry {
    pub defect: f64,
    pub residual: f64,
    /// Always true for data with a displacement part.
    pub pass: bool,
}

#[derive(Debug)]
pub struct Pipeline {
    pub coeffs: DerivedCoefficients,
    pub grid: CharGrid,
    pub modes: Vec<SolvedMode>,
}

fn profile(b: &Option<crate::profile::BumpSpec>) -> &dyn Profile1D {
    match b {
        Some(b) => b,
        None => &ZeroProfile,
    }
}

fn solve_one(coeffs: &DerivedCoefficients, grid: &CharGrid, table: &CoefficientTable, m: &ModeData) -> Result<SolvedMode> {
    let data = build_diagonal_data(coeffs, profile(&m.f1), profile(&m.f2), grid)?;
    let solution = solve_mode(table, &data, None)?;
    let lambda = table.lambda();
    let residual = discrete_residual(&solution, coeffs, lambda, None);
    Ok(SolvedMode {
        k: m.k,
        branch: m.branch,
        lambda,
        odd: m.f1.as_ref().and_then(|b| b.support()).is_none(),
        x1: m.support_start(),
        forward: extract_field(&solution, Direction::Forward, m.k)?,
        backward: extract_field(&solution, Direction::Backward, m.k)?,
        data,
        solution,
        residual,
    })
}

/// Solves every configured mode. Branches of one eigenvalue share a
/// coefficient table; results keep the configuration order.
pub fn solve_modes(cfg: &ExperimentConfig) -> Result<Pipeline> {
    let coeffs = cfg.metric.build()?.derive_coefficients();
    let grid = cfg.grid.build()?;
    if cfg.data.modes.is_empty() {
        return Err(Error::Config("data.modes is empty; nothing to solve".into()));
    }
    let model = BoundaryRegistry::default().build(&cfg.boundary)?;
    let lambdas: BTreeMap<usize, f64> =
        enumerate_modes(model.as_ref(), cfg.boundary.lambda_max).into_iter().map(|m| (m.k, m.lambda)).collect();
    let mut tables: BTreeMap<usize, CoefficientTable> = BTreeMap::new();
    for m in &cfg.data.modes {
        let lambda = *lambdas
            .get(&m.k)
            .ok_or_else(|| Error::Config(format!("mode k = {} is not below lambda_max", m.k)))?;
        if let std::collections::btree_map::Entry::Vacant(slot) = tables.entry(m.k) {
            slot.insert(CoefficientTable::new(&coeffs, lambda, &grid)?);
        }
    }
    let modes = cfg
        .data
        .modes
        .par_iter()
        .map(|m| solve_one(&coeffs, &grid, &tables[&m.k], m))
        .collect::<Result<Vec<_>>>()?;
    Ok(Pipeline { coeffs, grid, modes })
}
