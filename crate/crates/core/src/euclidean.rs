//! Closed-form reference for radial waves in ℝ³: spherical means, the
//! radiation field and the radial Radon transform.
//!
//! With `u(0) = 0`, `∂_t u(0) = f(|z|)`, spherical means give
//! `u(t, r) = (1/2r) ∫_{r−t}^{r+t} ρ f̃(ρ) dρ` with `f̃` the even extension.
//! Since `ρ f̃(ρ)` is odd, the integral is `H(|r+t|) − H(|r−t|)` with
//! `H(a) = ∫₀^a ρ f(ρ) dρ`. The forward field is `−(s/2) f(|s|)` for every
//! `s`, and `d/ds Rf = −2π s f(|s|)`, so the field is `(1/4π) d/ds Rf`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::jet::Jet;
use crate::profile::Profile1D;
use crate::quadrature::adaptive;

const QUAD_TOL: f64 = 1e-12;

/// Radial profile `f(r)`.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    source: Source,
}

#[derive(Debug, Clone)]
enum Source {
    Direct(Arc<dyn Profile1D>),
    /// `f(r) = g(1/r)/r²`, the velocity seen by `u` when the conjugated
    /// solution has velocity `F(x) g(x)` with `F(x) = x`.
    FromX(Arc<dyn Profile1D>),
}

impl RadialProfile {
    pub fn direct(f: Arc<dyn Profile1D>) -> Self {
        RadialProfile { source: Source::Direct(f) }
    }

    pub fn from_x_profile(g: Arc<dyn Profile1D>) -> Self {
        RadialProfile { source: Source::FromX(g) }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        match &self.source {
            Source::Direct(f) => f.value(r),
            Source::FromX(g) => {
                if r == 0.0 {
                    0.0
                } else {
                    g.eval(Jet::var_x(1.0 / r)).v / (r * r)
                }
            }
        }
    }

    /// `[r_a, r_b]` outside which `f` vanishes.
    pub fn support(&self) -> Option<(f64, f64)> {
        match &self.source {
            Source::Direct(f) => f.support(),
            Source::FromX(g) => g.support().map(|(lo, hi)| {
                let ra = if hi.is_finite() { 1.0 / hi } else { 0.0 };
                let rb = if lo > 0.0 { 1.0 / lo } else { f64::INFINITY };
                (ra, rb)
            }),
        }
    }

    /// `H(a) = ∫₀^a ρ f(ρ) dρ`, `a ≥ 0`.
    pub fn moment(&self, a: f64) -> Result<f64> {
        let Some((lo, hi)) = self.support() else {
            return Ok(0.0);
        };
        let top = a.min(hi);
        if top <= lo {
            return Ok(0.0);
        }
        let scale = self.moment_scale();
        adaptive(|rho| rho * self.eval(rho), lo, top, QUAD_TOL * scale)
    }

    fn moment_scale(&self) -> f64 {
        match self.support() {
            Some((lo, hi)) if hi.is_finite() => {
                let peak = (0..=256)
                    .map(|k| {
                        let r = lo + (hi - lo) * k as f64 / 256.0;
                        (r * self.eval(r)).abs()
                    })
                    .fold(0.0, f64::max);
                (peak * (hi - lo)).max(f64::MIN_POSITIVE)
            }
            _ => 1.0,
        }
    }
}

/// `u(t, r)` for zero displacement and velocity `f`.
pub fn dalembert_radial(f: &RadialProfile, t: f64, r: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let outer = f.moment((r + t).abs())?;
    let inner = f.moment((r - t).abs())?;
    Ok((outer - inner) / (2.0 * r))
}

/// Closed-form forward field `−(s/2) f(|s|)`.
pub fn radiation_field_radial(f: &RadialProfile, s: f64) -> f64 {
    -0.5 * s * f.eval(s.abs())
}

/// `∂_s [r u(s + r, r)]` at finite `r`, by a centred difference of the
/// spherical-means quadrature with step `ds`.
pub fn finite_r_field(f: &RadialProfile, s: f64, r: f64, ds: f64) -> Result<f64> {
    let v = |s: f64| -> Result<f64> { Ok(r * dalembert_radial(f, s + r, r)?) };
    Ok((v(s + ds)? - v(s - ds)?) / (2.0 * ds))
}

/// `R f(s) = 2π ∫_{|s|}^∞ ρ f(ρ) dρ`, the integral of `f(|z|)` over the
/// plane at signed distance `s` from the origin.
pub fn radon_radial(f: &RadialProfile, s: f64) -> Result<f64> {
    let Some((_, hi)) = f.support() else {
        return Ok(0.0);
    };
    Ok(2.0 * PI * (f.moment(hi)? - f.moment(s.abs())?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaxPhillipsReport {
    /// Least-squares `c` in `ℛ₊(s) ≈ c · d/ds R f(s)`.
    pub constant: f64,
    /// `max |ℛ₊ − c R'f| / max |ℛ₊|`.
    pub residual: f64,
    /// `max |ℛ₊(s) + ℛ₊(−s)| / max |ℛ₊|`; zero for an odd field.
    pub field_oddness_defect: f64,
    /// `max |Rf(s) − Rf(−s)| / max |Rf|`; zero for an even transform.
    pub radon_evenness_defect: f64,
    pub samples: usize,
}

/// Compares the closed-form field with a finite-difference derivative of the
/// quadrature Radon transform at `samples` points spanning the support.
pub fn lax_phillips_compare(f: &RadialProfile, samples: usize) -> Result<LaxPhillipsReport> {
    let (lo, hi) = f.support().unwrap_or((0.0, 1.0));
    let hi = if hi.is_finite() { hi } else { lo + 1.0 };
    let span = hi + 0.25 * (hi - lo);
    let ds = 1e-4 * (hi - lo);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut pairs = Vec::with_capacity(samples);
    let mut odd: f64 = 0.0;
    let mut even: f64 = 0.0;
    let mut rmax: f64 = 0.0;
    for k in 0..samples {
        let s = -span + 2.0 * span * (k as f64 + 0.5) / samples as f64;
        let field = radiation_field_radial(f, s);
        let deriv = (radon_radial(f, s + ds)? - radon_radial(f, s - ds)?) / (2.0 * ds);
        num += field * deriv;
        den += deriv * deriv;
        pairs.push((field, deriv));
        odd = odd.max((field + radiation_field_radial(f, -s)).abs());
        let rf = radon_radial(f, s)?;
        rmax = rmax.max(rf.abs());
        even = even.max((rf - radon_radial(f, -s)?).abs());
    }
    let constant = if den > 0.0 { num / den } else { 0.0 };
    let fmax = pairs.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let rel = |v: f64, m: f64| if m > 0.0 { v / m } else { 0.0 };
    let residual = pairs.iter().map(|(a, b)| (a - constant * b).abs()).fold(0.0, f64::max);
    Ok(LaxPhillipsReport {
        constant,
        residual: rel(residual, fmax),
        field_oddness_defect: rel(odd, fmax),
        radon_evenness_defect: rel(even, rmax),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{BumpSpec, Smoothstep, ZeroProfile};

    fn shell() -> RadialProfile {
        RadialProfile::direct(Arc::new(BumpSpec::new(1.0, 2.0, 0.05, Smoothstep::Poly4)))
    }

    #[test]
    fn finite_speed_and_zero_time() {
        let f = shell();
        assert_eq!(dalembert_radial(&f, 0.0, 3.0).unwrap(), 0.0);
        assert_eq!(dalembert_radial(&f, 0.1, 5.0).unwrap(), 0.0);
        assert!(dalembert_radial(&f, 3.0, 3.5).unwrap() > 0.0);
    }

    #[test]
    fn field_examples() {
        let f = shell();
        assert_eq!(radiation_field_radial(&f, -3.0), 0.0);
        assert!((radiation_field_radial(&f, -1.5) - 0.75 * f.eval(1.5)).abs() < 1e-15);
        let z = RadialProfile::direct(Arc::new(ZeroProfile));
        assert_eq!(radiation_field_radial(&z, -1.5), 0.0);
        assert_eq!(radon_radial(&z, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn radon_of_the_shell() {
        let f = shell();
        assert_eq!(radon_radial(&f, 2.5).unwrap(), 0.0);
        // Each smoothstep end is odd about its midpoint, so the smoothed shell
        // matches the sharp shell [1.025, 1.975] up to second order in the
        // end width; the fully sharp [1, 2] shell would give 3π.
        let full = radon_radial(&f, 0.0).unwrap();
        let sharp = PI * (1.975f64.powi(2) - 1.025f64.powi(2));
        assert!((full - sharp).abs() < 2.0 * PI * 0.05 * 0.05, "{full}");
    }

    #[test]
    fn field_is_derivative_of_radon_over_four_pi() {
        let r = lax_phillips_compare(&shell(), 80).unwrap();
        assert!((r.constant - 1.0 / (4.0 * PI)).abs() < 1e-5, "{r:?}");
        assert!(r.residual < 1e-3 && r.field_oddness_defect < 1e-14 && r.radon_evenness_defect < 1e-14);
    }
}
