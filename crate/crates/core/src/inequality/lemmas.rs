//! Quadrature of both sides of the elementary lemmas used for regularity up
//! to the edges: the one-variable bounds along characteristics, the Fubini
//! identity on the triangles `Ω_{a,b}`, and the rotated decay estimate.

use serde::{Deserialize, Serialize};

use super::family::TestFunction2D;
use crate::error::{Error, Result};
use crate::quadrature::{converge, GaussLegendre};

/// Relative slack on `LHS ≤ RHS`.
pub const PASS_SLACK: f64 = 1e-8;

/// Gauss–Legendre order per panel and the panel-doubling schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadSpec {
    pub order: usize,
    pub start_panels: usize,
    pub max_panels: usize,
    /// Largest relative change accepted between the last two doublings.
    pub tol: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { order: 10, start_panels: 2, max_panels: 512, tol: 1e-7 }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 || self.order > 64 {
            return Err(Error::Config(format!("quadrature order {} outside [2, 64]", self.order)));
        }
        if self.start_panels == 0 || self.max_panels < 2 * self.start_panels {
            return Err(Error::Config("max_panels must be at least twice start_panels".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("quadrature tolerance {} must lie in (0, 1)", self.tol)));
        }
        Ok(())
    }

    pub(crate) fn rule(&self) -> GaussLegendre {
        GaussLegendre::new(self.order)
    }

    /// Runs `eval` under panel doubling and returns the settled values with
    /// the final relative change.
    pub(crate) fn settle<F>(&self, eval: F) -> Result<(Vec<f64>, f64)>
    where
        F: FnMut(usize) -> Vec<f64>,
    {
        let c = converge(eval, self.start_panels, self.max_panels, self.tol, f64::MIN_POSITIVE)?;
        Ok((c.values, c.rel_change))
    }
}

/// Both sides of one inequality instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// Relative change of the integrals in the last panel doubling.
    pub rel_change: f64,
}

impl InequalityCheck {
    fn new(lhs: f64, rhs: f64, rel_change: f64) -> Self {
        InequalityCheck { lhs, rhs, pass: lhs <= rhs * (1.0 + PASS_SLACK), rel_change }
    }

    /// `LHS/RHS`, zero when both vanish.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

/// `∫_μ^b (μ+ν)^{−1−k}|w|² dν ≤ 2b μ^{−1−k}|w(μ,μ)|² + b ∫_μ^b (μ+ν)^{−k}|∂_ν w|² dν`.
pub fn check_bound0(w: &dyn TestFunction2D, k: u32, mu: f64, b: f64, quad: &QuadSpec) -> Result<InequalityCheck> {
    if !(mu > 0.0 && mu < b) {
        return Err(Error::InvalidData(format!("need 0 < mu < b, got mu = {mu}, b = {b}")));
    }
    let rule = quad.rule();
    let kf = k as f64;
    let breaks: Vec<f64> = w.radial_breaks().iter().map(|r| r - mu).collect();
    let (vals, change) = quad.settle(|p| {
        let mut lhs = 0.0;
        let mut grad = 0.0;
        for (nu, wt) in rule.composite_points_split(mu, b, p, &breaks) {
            let j = w.jet(mu, nu);
            let s = mu + nu;
            lhs += wt * s.powf(-1.0 - kf) * j.v * j.v;
            grad += wt * s.powf(-kf) * j.dy * j.dy;
        }
        vec![lhs, grad]
    })?;
    let diag = w.value(mu, mu);
    let rhs = 2.0 * b * mu.powf(-1.0 - kf) * diag * diag + b * vals[1];
    Ok(InequalityCheck::new(vals[0], rhs, change))
}

/// `∫_a^ν (μ+ν)^{−1}|w|² dμ ≤ 2ν^{−1}|w(ν,ν)|² + ν ∫_a^ν |∂_μ w|² dμ`, for
/// `0 ≤ a < ν ≤ 1`. The diagonal constant is not scale invariant and the
/// bound needs `ν ≤ 1`.
pub fn check_bound0_transverse(w: &dyn TestFunction2D, a: f64, nu: f64, quad: &QuadSpec) -> Result<InequalityCheck> {
    if !(a >= 0.0 && a < nu && nu <= 1.0) {
        return Err(Error::InvalidData(format!("need 0 <= a < nu <= 1, got a = {a}, nu = {nu}")));
    }
    let rule = quad.rule();
    let breaks: Vec<f64> = w.radial_breaks().iter().map(|r| r - nu).collect();
    let (vals, change) = quad.settle(|p| {
        let mut lhs = 0.0;
        let mut grad = 0.0;
        for (mu, wt) in rule.composite_points_split(a, nu, p, &breaks) {
            let j = w.jet(mu, nu);
            lhs += wt * j.v * j.v / (mu + nu);
            grad += wt * j.dx * j.dx;
        }
        vec![lhs, grad]
    })?;
    let diag = w.value(nu, nu);
    let rhs = 2.0 * diag * diag / nu + nu * vals[1];
    Ok(InequalityCheck::new(vals[0], rhs, change))
}

/// Both sides of the Fubini identity on `Ω_{a₀,b} = {a₀ ≤ μ ≤ ν ≤ b}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FubiniCheck {
    /// `∫_{a₀}^b ∫_{Ω_{a,b}} F da`.
    pub nested: f64,
    /// `∫_{Ω_{a₀,b}} (μ − a₀) F`.
    pub weighted: f64,
    pub residual: f64,
    /// `∫_{Ω_{a₀,b}} (μ − a₀)|F|`.
    pub scale: f64,
    pub pass: bool,
    pub rel_change: f64,
}

/// Residual tolerance relative to [`FubiniCheck::scale`].
pub const FUBINI_TOL: f64 = 1e-8;

pub fn check_fubini(f: &dyn TestFunction2D, a0: f64, b: f64, quad: &QuadSpec) -> Result<FubiniCheck> {
    if !(a0 >= 0.0 && a0 < b) {
        return Err(Error::InvalidData(format!("need 0 <= a0 < b, got a0 = {a0}, b = {b}")));
    }
    let rule = quad.rule();
    let (vals, change) = quad.settle(|p| {
        // I(a) = ∫_a^b G(μ) dμ with G(μ) = ∫_μ^b F dν, accumulated from b
        // down through the outer nodes one gap at a time
        let inner = |mu: f64| rule.composite(mu, b, p, |nu| f.value(mu, nu));
        let outer = rule.composite_points(a0, b, p);
        let mut nested = 0.0;
        let mut tail = 0.0;
        let mut upper = b;
        for &(a, wa) in outer.iter().rev() {
            tail += rule.integrate(a, upper, &inner);
            upper = a;
            nested += wa * tail;
        }
        let weighted = rule.composite_2d((a0, b), |mu| mu, |_| b, (p, p), |mu, nu| (mu - a0) * f.value(mu, nu));
        let scale = rule.composite_2d((a0, b), |mu| mu, |_| b, (p, p), |mu, nu| (mu - a0) * f.value(mu, nu).abs());
        vec![nested, weighted, scale]
    })?;
    let residual = (vals[0] - vals[1]).abs();
    let pass = residual <= FUBINI_TOL * vals[2].max(f64::MIN_POSITIVE);
    Ok(FubiniCheck { nested: vals[0], weighted: vals[1], residual, scale: vals[2], pass, rel_change: change })
}

/// Integrals entering the rotated decay estimate on `[0,T]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayIntegrals {
    pub m: u32,
    /// `∬ (μ+ν)^{−m−2}|w|²`.
    pub bulk: f64,
    /// `∫_0^T μ^{−m−1}|w(μ,μ)|²`.
    pub diagonal: f64,
    /// `∬ (μ+ν)^{−m}|(∂_ν − ∂_μ)w|²`.
    pub cross: f64,
    pub rel_change: f64,
}

impl DecayIntegrals {
    /// Diagonal weight `2^{−m}`, cross weight 1.
    pub fn stated(&self) -> InequalityCheck {
        let rhs = 2f64.powi(-(self.m as i32)) * self.diagonal + self.cross;
        InequalityCheck::new(self.bulk, rhs, self.rel_change)
    }

    /// Constants produced by running the rotation argument to the end:
    /// Cauchy–Schwarz along each `r = const` segment, `dτ dr = 2 dμ dν` and
    /// `∂_τ = ½(∂_ν − ∂_μ)` give diagonal weight `2^{1−m}` and cross
    /// weight `¼`.
    pub fn rotated(&self) -> InequalityCheck {
        let rhs = 2f64.powi(1 - self.m as i32) * self.diagonal + 0.25 * self.cross;
        InequalityCheck::new(self.bulk, rhs, self.rel_change)
    }
}

/// Evaluates the three integrals in the rotated chart, where the corner
/// weight is a power of `r` alone: `r ∈ [0, 2T]`, `|τ| ≤ min(r, 2T − r)`.
pub fn decay_integrals(w: &dyn TestFunction2D, m: u32, t_max: f64, quad: &QuadSpec) -> Result<DecayIntegrals> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidData(format!("window T = {t_max} must be positive")));
    }
    let rule = quad.rule();
    let mf = m as f64;
    let (vals, change) = quad.settle(|p| {
        let mut bulk = 0.0;
        let mut cross = 0.0;
        for (lo, hi) in [(0.0, t_max), (t_max, 2.0 * t_max)] {
            for (r, wr) in rule.composite_points(lo, hi, p) {
                let half = r.min(2.0 * t_max - r);
                // the family is polynomial along each segment; half the radial
                // panel count still doubles with it
                for (tau, wt) in rule.composite_points(-half, half, (p / 2).max(1)) {
                    let j = w.jet(0.5 * (r - tau), 0.5 * (r + tau));
                    // dμ dν = ½ dτ dr
                    let wgt = 0.5 * wr * wt;
                    bulk += wgt * r.powf(-mf - 2.0) * j.v * j.v;
                    let d = j.dy - j.dx;
                    cross += wgt * r.powf(-mf) * d * d;
                }
            }
        }
        let diagonal = rule.composite(0.0, t_max, p, |mu| {
            let v = w.value(mu, mu);
            mu.powf(-mf - 1.0) * v * v
        });
        vec![bulk, diagonal, cross]
    })?;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature("decay weights diverge for this test function".into()));
    }
    Ok(DecayIntegrals { m, bulk: vals[0], diagonal: vals[1], cross: vals[2], rel_change: change })
}

/// The stated form of the decay estimate.
pub fn check_decay(w: &dyn TestFunction2D, m: u32, t_max: f64, quad: &QuadSpec) -> Result<InequalityCheck> {
    Ok(decay_integrals(w, m, t_max, quad)?.stated())
}

/// Smallest `(μν)^p` exponent that keeps every decay integral finite,
/// `p > (m+2)/2`.
pub fn decay_corner_power(m: u32) -> i32 {
    (m as i32 + 2) / 2 + 1
}
