//! Weighted estimate for `P = r²∂_r² − r²∂_τ² − (λφ + B)` on cone-supported
//! functions, with the weight `r^{−2γ}` factored as `r_lo^{−2γ}·(r/r_lo)^{−2γ}`
//! so every integrand stays below overflow for any `γ`.
//!
//! In characteristic coordinates `∂_r² − ∂_τ² = ∂_μ∂_ν`, so `P` annihilates
//! exactly the solutions of the per-mode Goursat equation.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::{ConeFunction, TestFunction2D};
use super::lemmas::QuadSpec;
use crate::error::{Error, Result};
use crate::geometry::{x_of_rotated, DerivedCoefficients};

#[derive(Debug, Clone, Copy)]
pub struct CarlemanInstance<'a> {
    pub u: &'a dyn TestFunction2D,
    pub coeffs: &'a DerivedCoefficients,
    pub lambda: f64,
    pub gamma: f64,
    /// Radial shell `[r_lo, r_hi]` containing the support of `u`.
    pub r_range: (f64, f64),
    pub quad: QuadSpec,
}

/// Integrals of one instance, each divided by `exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlemanTerms {
    /// `‖r^{−γ−2} P u‖²`.
    pub lhs: f64,
    /// `γ²‖r^{−1} ∂_r (r^{−γ} u)‖²`.
    pub rhs1: f64,
    /// `γ²‖r^{−1−γ} ∂_τ u‖²`.
    pub rhs2: f64,
    /// `γ⁴‖r^{−γ−2} u‖²`.
    pub rhs3: f64,
    /// `γ²‖r^{−γ} ∂_r (r^{−1} u)‖²`, the operator order of the restated form.
    pub rhs1_swapped: f64,
    /// `−2γ ln r_lo`.
    pub log_scale: f64,
    pub rel_change: f64,
}

impl CarlemanTerms {
    /// `LHS / (RHS₁ + RHS₂ + RHS₃)`.
    pub fn ratio(&self) -> f64 {
        let rhs = self.rhs1 + self.rhs2 + self.rhs3;
        if rhs == 0.0 {
            0.0
        } else {
            self.lhs / rhs
        }
    }
}

pub fn carleman_check(inst: &CarlemanInstance) -> Result<CarlemanTerms> {
    let (r_lo, r_hi) = inst.r_range;
    if !(r_lo > 0.0 && r_lo < r_hi && r_hi.is_finite()) {
        return Err(Error::InvalidData(format!("radial shell [{r_lo}, {r_hi}] must satisfy 0 < r_lo < r_hi")));
    }
    if !(inst.gamma >= 1.0 && inst.gamma.is_finite()) {
        return Err(Error::InvalidData(format!("gamma = {} must be at least 1", inst.gamma)));
    }
    // x = (r² − τ²)/(2r) peaks at r/2 on the axis τ = 0
    if 0.5 * r_hi > inst.coeffs.eps() {
        return Err(Error::OutsidePatch(format!("shell reaches x = {} beyond eps = {}", 0.5 * r_hi, inst.coeffs.eps())));
    }
    let g = inst.gamma;
    let rule = inst.quad.rule();
    let (vals, rel_change) = inst.quad.settle(|p| {
        let mut acc = [0.0; 5];
        let angular = rule.composite_points(-1.0, 1.0, (p / 4).max(2));
        for (r, wr) in rule.composite_points(r_lo, r_hi, p) {
            let scaled = (-2.0 * g * (r / r_lo).ln()).exp();
            if scaled == 0.0 {
                continue;
            }
            for &(sigma, ws) in &angular {
                // τ = rσ, dτ = r dσ
                let tau = r * sigma;
                let wgt = wr * ws * r * scaled;
                let j = inst.u.jet(0.5 * (r - tau), 0.5 * (r + tau));
                let u_r = 0.5 * (j.dx + j.dy);
                let u_tau = 0.5 * (j.dy - j.dx);
                let coef = inst.coeffs.mode_potential(inst.lambda, x_of_rotated(tau, r));
                let pu = r * r * j.dxy - coef * j.v;
                let r2 = r * r;
                acc[0] += wgt * pu * pu / (r2 * r2);
                let a = u_r - g * j.v / r;
                acc[1] += wgt * a * a / r2;
                acc[2] += wgt * u_tau * u_tau / r2;
                acc[3] += wgt * j.v * j.v / (r2 * r2);
                let b = u_r - j.v / r;
                acc[4] += wgt * b * b / r2;
            }
        }
        acc.to_vec()
    })?;
    let g2 = g * g;
    Ok(CarlemanTerms {
        lhs: vals[0],
        rhs1: g2 * vals[1],
        rhs2: g2 * vals[2],
        rhs3: g2 * g2 * vals[3],
        rhs1_swapped: g2 * vals[4],
        log_scale: -2.0 * g * r_lo.ln(),
        rel_change,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub gamma: f64,
    pub lambda: f64,
    /// Index into the test-function corpus.
    pub function: usize,
    pub terms: CarlemanTerms,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaSummary {
    pub lambda: f64,
    /// Smallest swept `γ` from which every test function keeps at least half
    /// of its ratio at the largest `γ`.
    pub gamma0: f64,
    /// Smallest ratio over the corpus for `γ ≥ γ₀`.
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlemanSweep {
    pub points: Vec<SweepPoint>,
    pub per_lambda: Vec<LambdaSummary>,
    /// `γ₀` nondecreasing along the (sorted) `λ` list.
    pub gamma0_monotone: bool,
}

/// Fraction of the largest-`γ` ratio a ratio must keep to count as settled.
const SETTLED_FRACTION: f64 = 0.5;

/// Index of the first `γ` from which every later ratio stays above
/// `SETTLED_FRACTION` of the last one.
fn settled_from(ratios: &[f64]) -> usize {
    let Some(&last) = ratios.last() else {
        return 0;
    };
    let floor = SETTLED_FRACTION * last;
    let mut start = ratios.len() - 1;
    while start > 0 && ratios[start - 1] >= floor {
        start -= 1;
    }
    start
}

/// The default corpus: shells at three radii and two angular profiles.
pub fn default_corpus() -> Vec<ConeFunction> {
    vec![
        ConeFunction::new(0.3, 0.6),
        ConeFunction::new(0.2, 0.5),
        ConeFunction { lo: 0.1, hi: 0.45, radial_power: 4, angular_power: 6 },
    ]
}

pub fn carleman_sweep(
    coeffs: &DerivedCoefficients,
    lambdas: &[f64],
    gammas: &[f64],
    corpus: &[ConeFunction],
    quad: &QuadSpec,
) -> Result<CarlemanSweep> {
    if lambdas.is_empty() || gammas.is_empty() || corpus.is_empty() {
        return Err(Error::Config("carleman sweep needs lambdas, gammas and test functions".into()));
    }
    let mut lambdas = lambdas.to_vec();
    lambdas.sort_by(f64::total_cmp);
    let mut gammas = gammas.to_vec();
    gammas.sort_by(f64::total_cmp);
    let mut jobs: Vec<(f64, usize, f64)> = Vec::with_capacity(lambdas.len() * corpus.len() * gammas.len());
    for &l in &lambdas {
        for f in 0..corpus.len() {
            jobs.extend(gammas.iter().map(|&g| (l, f, g)));
        }
    }
    let points = jobs
        .par_iter()
        .map(|&(lambda, function, gamma)| {
            let u = &corpus[function];
            let inst = CarlemanInstance { u, coeffs, lambda, gamma, r_range: u.r_range(), quad: *quad };
            Ok(SweepPoint { gamma, lambda, function, terms: carleman_check(&inst)? })
        })
        .collect::<Result<Vec<_>>>()?;

    let ng = gammas.len();
    let per_lambda: Vec<LambdaSummary> = lambdas
        .iter()
        .enumerate()
        .map(|(li, &lambda)| {
            let rows: Vec<Vec<f64>> = (0..corpus.len())
                .map(|f| {
                    let base = (li * corpus.len() + f) * ng;
                    points[base..base + ng].iter().map(|p| p.terms.ratio()).collect()
                })
                .collect();
            let start = rows.iter().map(|r| settled_from(r)).max().unwrap_or(0);
            let c = rows.iter().flat_map(|r| r[start..].iter().copied()).fold(f64::INFINITY, f64::min);
            LambdaSummary { lambda, gamma0: gammas[start], c }
        })
        .collect();
    let gamma0_monotone = per_lambda.windows(2).all(|w| w[0].gamma0 <= w[1].gamma0);
    Ok(CarlemanSweep { points, per_lambda, gamma0_monotone })
}

/// Rows `gamma,lambda,lhs,rhs1,rhs2,rhs3,ratio,rhs1_swapped,log_scale,function`.
pub fn write_sweep_csv<W: Write>(sweep: &CarlemanSweep, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "gamma,lambda,lhs,rhs1,rhs2,rhs3,ratio,rhs1_swapped,log_scale,function")?;
    for p in &sweep.points {
        let t = &p.terms;
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            p.gamma,
            p.lambda,
            t.lhs,
            t.rhs1,
            t.rhs2,
            t.rhs3,
            t.ratio(),
            t.rhs1_swapped,
            t.log_scale,
            p.function
        )?;
    }
    Ok(())
}
