//! Fixed-`μ` energy of a computed mode against the weighted `H¹` norms of
//! its diagonal data. The constant in the estimate is not constructive, so
//! the ratio is reported rather than bounded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::goursat::{DiagonalData, ModeSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `max_μ ∫_0^T |∂_ν w|² + (μ+ν)^{−2}(λ+1)|w|² dν`.
    pub energy: f64,
    /// Node `μ` attaining the maximum.
    pub mu_at_max: f64,
    /// `‖q₁‖²_{1,1} + ‖q₂‖²_{1,1}`.
    pub data_norm: f64,
    /// `energy / data_norm`; `None` when both vanish.
    pub ratio: Option<f64>,
}

impl EnergyReport {
    pub fn is_trivial(&self) -> bool {
        self.ratio.is_none()
    }
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => h * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Second-order derivative of nodal samples: centred inside, one-sided at
/// both ends.
fn nodal_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len() - 1;
    (0..=n)
        .map(|i| match i {
            0 => (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h),
            i if i == n => (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h),
            i => (v[i + 1] - v[i - 1]) / (2.0 * h),
        })
        .collect()
}

/// `∫ |μ^{−1}q|² + |(μ^{−1}q)′|²` by the trapezoid rule on the nodes. The
/// quotient at `μ = 0` is continued linearly from the next two nodes; data
/// with `q(0) ≠ 0` has an infinite norm.
fn weighted_h1_sq(q: &[f64], h: f64) -> Result<f64> {
    if q[0] != 0.0 {
        return Err(Error::InvalidData(format!("diagonal data q(0) = {:e} gives an infinite weighted norm", q[0])));
    }
    let mut v: Vec<f64> = q.iter().enumerate().map(|(i, &qi)| if i == 0 { 0.0 } else { qi / (i as f64 * h) }).collect();
    v[0] = 2.0 * v[1] - v[2];
    let dv = nodal_derivative(&v, h);
    let integrand: Vec<f64> = v.iter().zip(&dv).map(|(a, b)| a * a + b * b).collect();
    Ok(trapezoid(&integrand, h))
}

pub fn check_energy(sol: &ModeSolution, data: &DiagonalData) -> Result<EnergyReport> {
    let grid = sol.grid;
    let n = grid.cells();
    let h = grid.h();
    let weight = sol.lambda + 1.0;
    let mut energy: f64 = 0.0;
    let mut mu_at_max = 0.0;
    for i in 0..=n {
        let row: Vec<f64> = (0..=n).map(|j| sol.at(i, j)).collect();
        let d = nodal_derivative(&row, h);
        let integrand: Vec<f64> = (0..=n)
            .map(|j| {
                let r = grid.node(i) + grid.node(j);
                let bulk = if r > 0.0 { weight * row[j] * row[j] / (r * r) } else { 0.0 };
                d[j] * d[j] + bulk
            })
            .collect();
        let e = trapezoid(&integrand, h);
        if e > energy {
            energy = e;
            mu_at_max = grid.node(i);
        }
    }
    let q2: Vec<f64> = data.q2_nodes().collect();
    let data_norm = weighted_h1_sq(data.q1(), h)? + weighted_h1_sq(&q2, h)?;
    let ratio = if energy == 0.0 && data_norm == 0.0 {
        None
    } else if data_norm == 0.0 {
        return Err(Error::Numerical("nonzero energy from zero data".into()));
    } else {
        Some(energy / data_norm)
    };
    Ok(EnergyReport { energy, mu_at_max, data_norm, ratio })
}
