//! Characteristic marching for the per-mode problem
//!
//! ```text
//! (μ+ν)² ∂_μ∂_ν w = (λφ(x) + B(x)) w + G,   x = 2μν/(μ+ν),
//! w(μ,μ) = q₁(μ),  ∂_μ w(μ,μ) = q₂(μ)
//! ```
//!
//! on `[0,T]²`. Integrating the equation over a grid rectangle gives
//! `w_A − w_B − w_C + w_D = ∬ c w + G/r²` with `c = (λφ+B)/r²`; the scheme
//! samples `c` and `G/r²` at the cell centre and averages `w` over the
//! corners, which is second order and solvable for the far corner `A` in
//! closed form. The first off-diagonal row uses half cells whose diagonal
//! side carries the data.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{x_of, DerivedCoefficients};
use crate::jet::Jet;
use crate::profile::Profile1D;

/// Smallest per-cell denominator magnitude accepted before the cell is
/// declared degenerate.
const DEGENERATE: f64 = 1e-8;

pub const MIN_CELLS: usize = 16;

/// Source term `G(μ, ν)`.
pub type Forcing = dyn Fn(f64, f64) -> f64 + Sync;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharGrid {
    t_max: f64,
    n: usize,
    cutoff: f64,
}

impl CharGrid {
    /// `cutoff` defaults to `4h`.
    pub fn new(t_max: f64, n: usize, cutoff: Option<f64>) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidGrid(format!("T = {t_max} must be positive")));
        }
        if n < MIN_CELLS {
            return Err(Error::InvalidGrid(format!("N = {n} is below the minimum {MIN_CELLS}")));
        }
        let h = t_max / n as f64;
        let cutoff = cutoff.unwrap_or(4.0 * h);
        if !(cutoff >= 2.0 * h * (1.0 - 1e-12)) || !cutoff.is_finite() {
            return Err(Error::InvalidGrid(format!("corner cutoff {cutoff} must be at least 2h = {}", 2.0 * h)));
        }
        Ok(CharGrid { t_max, n, cutoff })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn cells(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.t_max / self.n as f64
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Coordinate of node `i`; exact at both ends.
    pub fn node(&self, i: usize) -> f64 {
        self.t_max * i as f64 / self.n as f64
    }

    /// Nodes with `(i+j)h < δ` are held at zero.
    pub fn pinned(&self, i: usize, j: usize) -> bool {
        ((i + j) as f64) < self.cutoff / self.h() * (1.0 - 1e-12)
    }

    /// Every `x` in the window is at most `T`; the collar must hold twice that.
    pub fn check_patch(&self, eps: f64) -> Result<()> {
        if 2.0 * self.t_max > eps * (1.0 + 1e-12) {
            return Err(Error::InvalidGrid(format!(
                "T = {} exceeds half the collar width eps = {eps}",
                self.t_max
            )));
        }
        Ok(())
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.n + 1) + j
    }
}

/// `q₁` on the nodes and `q₂` on the half-step grid.
#[derive(Debug, Clone)]
pub struct DiagonalData {
    n: usize,
    q1: Vec<f64>,
    /// `q₂(k h/2)`, `k = 0..=2N`.
    q2_half: Vec<f64>,
}

impl DiagonalData {
    /// Samples given closed forms; no boundary guard.
    pub fn from_fns(grid: &CharGrid, q1: impl Fn(f64) -> f64, q2: impl Fn(f64) -> f64) -> Self {
        let n = grid.cells();
        DiagonalData {
            n,
            q1: (0..=n).map(|i| q1(grid.node(i))).collect(),
            q2_half: (0..=2 * n).map(|k| q2(grid.t_max() * k as f64 / (2 * n) as f64)).collect(),
        }
    }

    pub fn zero(grid: &CharGrid) -> Self {
        Self::from_fns(grid, |_| 0.0, |_| 0.0)
    }

    pub fn q1(&self) -> &[f64] {
        &self.q1
    }

    pub fn q2_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        self.q2_half.iter().step_by(2).copied()
    }

    pub fn q2_half(&self) -> &[f64] {
        &self.q2_half
    }

    pub fn is_zero(&self) -> bool {
        self.q1.iter().chain(&self.q2_half).all(|&v| v == 0.0)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        DiagonalData {
            n: self.n,
            q1: self.q1.iter().map(|v| alpha * v).collect(),
            q2_half: self.q2_half.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn sum(&self, other: &DiagonalData) -> Self {
        DiagonalData {
            n: self.n,
            q1: self.q1.iter().zip(&other.q1).map(|(a, b)| a + b).collect(),
            q2_half: self.q2_half.iter().zip(&other.q2_half).map(|(a, b)| a + b).collect(),
        }
    }

    /// Simpson's rule for `∫ q₂` over cell `[ih, (i+1)h]`.
    fn q2_cell_integral(&self, i: usize, h: f64) -> f64 {
        let k = 2 * i;
        h / 6.0 * (self.q2_half[k] + 4.0 * self.q2_half[k + 1] + self.q2_half[k + 2])
    }
}

/// Diagonal data of the conjugated solution from radial profiles of the
/// initial displacement `f₁` and velocity `f₂`:
/// `q₁ = F f₁`, `q₂ = F f₂/(2μ²) + ½(F f₁)'`.
///
/// Data must vanish to high order at `μ = 0`: on `0 < μ ≤ 2h` every sample
/// must satisfy `|q| ≤ (μ/T)·max|q|`.
pub fn build_diagonal_data(
    coeffs: &DerivedCoefficients,
    f1: &dyn Profile1D,
    f2: &dyn Profile1D,
    grid: &CharGrid,
) -> Result<DiagonalData> {
    let n = grid.cells();
    let h = grid.h();
    let eval = |mu: f64| -> (f64, f64) {
        if mu <= 0.0 {
            return (0.0, 0.0);
        }
        let x = Jet::var_x(mu);
        let factor = coeffs.conformal_factor(x);
        let g = factor * f1.eval(x);
        let v = f2.eval(x);
        let q2 = factor.v * v.v / (2.0 * mu * mu) + 0.5 * g.dx;
        (g.v, q2)
    };
    let half: Vec<(f64, f64)> = (0..=2 * n).map(|k| eval(grid.t_max() * k as f64 / (2 * n) as f64)).collect();
    if half.iter().any(|(a, b)| !(a.is_finite() && b.is_finite())) {
        return Err(Error::InvalidData("diagonal data is not finite on [0, T]".into()));
    }
    let max1 = half.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let max2 = half.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    for (k, &(a, b)) in half.iter().enumerate().skip(1) {
        let mu = grid.t_max() * k as f64 / (2 * n) as f64;
        if mu > 2.0 * h * (1.0 + 1e-12) {
            break;
        }
        let allow = mu / grid.t_max();
        if a.abs() > allow * max1 || b.abs() > allow * max2 {
            return Err(Error::InvalidData(format!(
                "support touches boundary: data at mu = {mu:.3e} is not small against its maximum; \
                 profiles must vanish to high order at x = 0"
            )));
        }
    }
    Ok(DiagonalData {
        n,
        q1: half.iter().step_by(2).map(|p| p.0).collect(),
        q2_half: half.iter().map(|p| p.1).collect(),
    })
}

/// `c = (λφ + B)/r²` at the sample points of every cell, for one eigenvalue.
///
/// `c` depends on `(μ, ν)` only through `x` and `r`, both symmetric, so
/// mirror cells share entries.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    grid: CharGrid,
    lambda: f64,
    /// Rectangle with far corner `(i, j)`, `j ≥ i+2`, indexed like the grid.
    rect: Vec<f64>,
    /// Half cell on `[ih, (i+1)h]`, sampled at its centroid.
    tri: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(coeffs: &DerivedCoefficients, lambda: f64, grid: &CharGrid) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidData(format!("eigenvalue {lambda} must be nonnegative")));
        }
        grid.check_patch(coeffs.eps())?;
        let n = grid.cells();
        let h = grid.h();
        let c_at = |mu: f64, nu: f64| coeffs.mode_potential(lambda, x_of(mu, nu)) / ((mu + nu) * (mu + nu));
        let rect: Vec<f64> = (0..(n + 1) * (n + 1))
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / (n + 1), k % (n + 1));
                if j < i + 2 {
                    return 0.0;
                }
                c_at((i as f64 + 0.5) * h, (j as f64 - 0.5) * h)
            })
            .collect();
        let tri: Vec<f64> = (0..n)
            .map(|i| {
                let a = grid.node(i);
                c_at(a + h / 3.0, a + 2.0 * h / 3.0)
            })
            .collect();
        if let Some(bad) = rect.iter().chain(&tri).find(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite potential coefficient {bad}")));
        }
        Ok(CoefficientTable { grid: *grid, lambda, rect, tri })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grid(&self) -> &CharGrid {
        &self.grid
    }
}

#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub lambda: f64,
    pub grid: CharGrid,
    /// `w[i*(N+1) + j] ≈ w(μ_i, ν_j)`.
    values: Vec<f64>,
    /// Nodes held at zero by the corner cutoff.
    pub pinned: usize,
}

impl ModeSolution {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// `‖w(μ,ν) + w(ν,μ)‖_∞`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.grid.cells();
        let mut worst: f64 = 0.0;
        for i in 0..=n {
            for j in i..=n {
                worst = worst.max((self.at(i, j) + self.at(j, i)).abs());
            }
        }
        worst
    }

    /// `max |w|` over nodes with `μ + ν ≤ ρ`.
    pub fn band_max(&self, rho: f64) -> f64 {
        let n = self.grid.cells();
        let mut worst: f64 = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                if self.grid.node(i) + self.grid.node(j) <= rho * (1.0 + 1e-12) {
                    worst = worst.max(self.at(i, j).abs());
                }
            }
        }
        worst
    }

    /// CSV with columns `mu,nu,w`, rows in `(i, j)` order.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "mu,nu,w")?;
        let n = self.grid.cells();
        for i in 0..=n {
            for j in 0..=n {
                writeln!(out, "{:.16e},{:.16e},{:.16e}", self.grid.node(i), self.grid.node(j), self.at(i, j))?;
            }
        }
        Ok(())
    }
}

fn checked(denominator: f64, mu: f64, nu: f64, coefficient: f64) -> Result<f64> {
    if denominator.abs() < DEGENERATE || !denominator.is_finite() {
        return Err(Error::DegenerateCell { mu, nu, coefficient });
    }
    Ok(denominator)
}

/// Marches off the diagonal in both directions, one wavefront `j − i = d`
/// at a time. Nodes of a wavefront are independent, so they are computed in
/// parallel; each value is produced by the same sequence of operations
/// regardless of scheduling, so the result is bitwise reproducible.
pub fn solve_mode(table: &CoefficientTable, data: &DiagonalData, forcing: Option<&Forcing>) -> Result<ModeSolution> {
    let grid = table.grid;
    let n = grid.cells();
    if data.n != n {
        return Err(Error::InvalidGrid(format!("diagonal data has {} cells, the grid {n}", data.n)));
    }
    let h = grid.h();
    let g_over_r2 = |mu: f64, nu: f64| forcing.map_or(0.0, |g| g(mu, nu) / ((mu + nu) * (mu + nu)));
    let mut w = vec![0.0; (n + 1) * (n + 1)];
    let mut pinned = 0;

    for i in 0..=n {
        if grid.pinned(i, i) {
            pinned += 1;
        } else {
            w[grid.idx(i, i)] = data.q1[i];
        }
    }

    // half cells below and above the diagonal
    let area = 0.5 * h * h;
    for i in 0..n {
        let a = grid.node(i);
        let flux = data.q2_cell_integral(i, h);
        let c = table.tri[i];
        let diag = w[grid.idx(i, i)] + w[grid.idx(i + 1, i + 1)];
        let den = checked(1.0 + area * c / 3.0, a + h / 3.0, a + 2.0 * h / 3.0, c)?;
        for (p, q, base, g) in [
            (i, i + 1, data.q1[i + 1] - flux, g_over_r2(a + h / 3.0, a + 2.0 * h / 3.0)),
            (i + 1, i, data.q1[i] + flux, g_over_r2(a + 2.0 * h / 3.0, a + h / 3.0)),
        ] {
            if grid.pinned(p, q) {
                pinned += 1;
                continue;
            }
            w[grid.idx(p, q)] = (base - area * (c * diag / 3.0 + g)) / den;
        }
    }

    for d in 2..=n {
        let front: Vec<(f64, f64)> = (0..=n - d)
            .into_par_iter()
            .map(|i| -> Result<(f64, f64)> {
                let j = i + d;
                let c = table.rect[grid.idx(i, j)];
                let (mc, nc) = ((i as f64 + 0.5) * h, (j as f64 - 0.5) * h);
                let den = checked(1.0 + 0.25 * h * h * c, mc, nc, c)?;
                let step = |b: f64, cc: f64, dd: f64, g: f64| {
                    (b + cc - dd - h * h * (0.25 * c * (b + cc + dd) + g)) / den
                };
                let upper = if grid.pinned(i, j) {
                    0.0
                } else {
                    step(w[grid.idx(i, j - 1)], w[grid.idx(i + 1, j)], w[grid.idx(i + 1, j - 1)], g_over_r2(mc, nc))
                };
                let lower = if grid.pinned(j, i) {
                    0.0
                } else {
                    step(w[grid.idx(j - 1, i)], w[grid.idx(j, i + 1)], w[grid.idx(j - 1, i + 1)], g_over_r2(nc, mc))
                };
                Ok((upper, lower))
            })
            .collect::<Result<_>>()?;
        for (i, (upper, lower)) in front.into_iter().enumerate() {
            let j = i + d;
            if grid.pinned(i, j) {
                pinned += 2;
            }
            w[grid.idx(i, j)] = upper;
            w[grid.idx(j, i)] = lower;
        }
    }

    if let Some(k) = w.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "solution became non-finite at node ({}, {})",
            k / (n + 1),
            k % (n + 1)
        )));
    }
    Ok(ModeSolution { lambda: table.lambda, grid, values: w, pinned })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualNorms {
    pub max: f64,
    pub l2: f64,
    /// `max (μ+ν)²·max|w| + max|G|`, the size of the terms being balanced.
    pub scale: f64,
}

/// Centred-difference residual of `(μ+ν)²∂_μ∂_νw − (λφ+B)w − G` on interior
/// nodes whose stencil stays clear of the pinned corner.
pub fn discrete_residual(
    sol: &ModeSolution,
    coeffs: &DerivedCoefficients,
    lambda: f64,
    forcing: Option<&Forcing>,
) -> ResidualNorms {
    let grid = sol.grid;
    let n = grid.cells();
    let h = grid.h();
    let mut max: f64 = 0.0;
    let mut sq = 0.0;
    let mut gmax: f64 = 0.0;
    for i in 1..n {
        for j in 1..n {
            if grid.pinned(i - 1, j - 1) {
                continue;
            }
            let (mu, nu) = (grid.node(i), grid.node(j));
            let mixed = (sol.at(i + 1, j + 1) - sol.at(i + 1, j - 1) - sol.at(i - 1, j + 1) + sol.at(i - 1, j - 1))
                / (4.0 * h * h);
            let g = forcing.map_or(0.0, |f| f(mu, nu));
            gmax = gmax.max(g.abs());
            let r = mu + nu;
            let res = r * r * mixed - coeffs.mode_potential(lambda, x_of(mu, nu)) * sol.at(i, j) - g;
            max = max.max(res.abs());
            sq += res * res;
        }
    }
    let r_max = 2.0 * grid.t_max();
    ResidualNorms { max, l2: (sq * h * h).sqrt(), scale: r_max * r_max * sol.max_abs() + gmax }
}
