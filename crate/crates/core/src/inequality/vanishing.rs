//! The large-`γ` squeeze behind unique continuation, evaluated on a grid.
//!
//! With `χ(r) = 1` for `r < T/4` and `0` for `r > T/2`, the weighted estimate
//! applied to `χw` gives, up to its constant,
//!
//! ```text
//! ‖w‖_{B(0,T/4)} ≤ (T/4)^{γ+2} ‖r^{−γ−2} P(χw)‖ / γ².
//! ```
//!
//! For a solution `P(χw)` lives in the shell `T/4 ≤ r ≤ T/2`; if `w` also
//! vanishes for `r` up to some `r₀ > T/4`, the right side decays like
//! `(T/(4r₀))^γ`. A function that is not a solution keeps `P(χw)` near the
//! corner and the bound blows up instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{x_of, DerivedCoefficients};
use crate::goursat::{CharGrid, ModeSolution};
use crate::jet::Jet;
use crate::profile::Smoothstep;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub gammas: Vec<f64>,
    /// `ln` of the implied bound on `‖w‖_{B(0,T/4)}`; `None` when `P(χw)`
    /// vanishes on the grid.
    pub log_bounds: Vec<Option<f64>>,
    /// `ln(γ⁴‖r^{−γ−2} w‖_{B(0,T/4)})`; `None` when `w` vanishes there.
    pub log_ball_terms: Vec<Option<f64>>,
    pub non_increasing: bool,
    pub non_decreasing: bool,
}

/// `χ(r) = S((T/2 − r)/(T/4))` with the flat exponential step.
pub fn cutoff(t_max: f64, r: f64) -> f64 {
    Smoothstep::Exp.eval(Jet::var_x((0.5 * t_max - r) / (0.25 * t_max))).v
}

fn log_sum_exp(terms: &[f64]) -> Option<f64> {
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return None;
    }
    Some(top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln())
}

fn le(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(x), Some(y)) => x <= y,
    }
}

/// Runs the squeeze on grid values `w(i, j)`.
pub fn vanishing_demo<W>(
    grid: &CharGrid,
    w: W,
    coeffs: &DerivedCoefficients,
    lambda: f64,
    gammas: &[f64],
) -> Result<VanishingReport>
where
    W: Fn(usize, usize) -> f64,
{
    if gammas.iter().any(|&g| !(g >= 1.0 && g.is_finite())) {
        return Err(Error::InvalidData("every gamma must be at least 1".into()));
    }
    let n = grid.cells();
    let h = grid.h();
    let t = grid.t_max();
    let chi_w = |i: usize, j: usize| cutoff(t, grid.node(i) + grid.node(j)) * w(i, j);
    // (ln r, ln |P(χw)|) on interior nodes; ln r and ln |w| inside the ball
    let mut shell: Vec<(f64, f64)> = Vec::new();
    let mut ball: Vec<(f64, f64)> = Vec::new();
    for i in 1..n {
        for j in 1..n {
            let (mu, nu) = (grid.node(i), grid.node(j));
            let r = mu + nu;
            let mixed = (chi_w(i + 1, j + 1) - chi_w(i + 1, j - 1) - chi_w(i - 1, j + 1) + chi_w(i - 1, j - 1)) / (4.0 * h * h);
            let p = r * r * mixed - coeffs.mode_potential(lambda, x_of(mu, nu)) * chi_w(i, j);
            if p != 0.0 {
                shell.push((r.ln(), p.abs().ln()));
            }
            let v = w(i, j);
            if r < 0.25 * t && v != 0.0 {
                ball.push((r.ln(), v.abs().ln()));
            }
        }
    }
    let area = 2.0 * h.ln();
    let mut log_bounds = Vec::with_capacity(gammas.len());
    let mut log_ball_terms = Vec::with_capacity(gammas.len());
    for &g in gammas {
        let e = -2.0 * (g + 2.0);
        let terms: Vec<f64> = shell.iter().map(|(lr, lp)| area + 2.0 * lp + e * lr).collect();
        log_bounds.push(log_sum_exp(&terms).map(|s| (g + 2.0) * (0.25 * t).ln() + 0.5 * s - 2.0 * g.ln()));
        let terms: Vec<f64> = ball.iter().map(|(lr, lv)| area + 2.0 * lv + e * lr).collect();
        log_ball_terms.push(log_sum_exp(&terms).map(|s| 4.0 * g.ln() + 0.5 * s));
    }
    let non_increasing = log_bounds.windows(2).all(|p| le(p[1], p[0]));
    let non_decreasing = log_bounds.windows(2).all(|p| le(p[0], p[1]));
    Ok(VanishingReport { gammas: gammas.to_vec(), log_bounds, log_ball_terms, non_increasing, non_decreasing })
}

pub fn vanishing_demo_solution(sol: &ModeSolution, coeffs: &DerivedCoefficients, gammas: &[f64]) -> Result<VanishingReport> {
    vanishing_demo(&sol.grid, |i, j| sol.at(i, j), coeffs, sol.lambda, gammas)
}
