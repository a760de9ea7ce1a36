//! Radial data profiles: polynomials multiplied by smoothstep ends.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{horner, Jet};

/// Transition shape used at the ends of a bump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothstep {
    /// Degree-9 polynomial step; four continuous derivatives.
    #[default]
    Poly4,
    /// `e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})`; flat to infinite order at both ends.
    Exp,
}

impl Smoothstep {
    /// Step from 0 (t <= 0) to 1 (t >= 1).
    pub fn eval(self, t: Jet) -> Jet {
        if t.v <= 0.0 {
            return Jet::constant(0.0);
        }
        if t.v >= 1.0 {
            return Jet::constant(1.0);
        }
        match self {
            Smoothstep::Poly4 => {
                // t^5 (126 - 420 t + 540 t^2 - 315 t^3 + 70 t^4)
                const C: [f64; 10] = [0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0];
                horner(&C, t)
            }
            Smoothstep::Exp => {
                // below this the exponentials underflow and 1/t^2 overflows
                const FLOOR: f64 = 1.0 / 700.0;
                if t.v < FLOOR {
                    return Jet::constant(0.0);
                }
                if 1.0 - t.v < FLOOR {
                    return Jet::constant(1.0);
                }
                let a = (-(t.recip())).exp();
                let b = (-((1.0 - t).recip())).exp();
                a / (a + b)
            }
        }
    }
}

/// A scalar function of one variable evaluated with exact derivatives.
pub trait Profile1D: Send + Sync + fmt::Debug {
    fn eval(&self, x: Jet) -> Jet;

    fn value(&self, x: f64) -> f64 {
        self.eval(Jet::var_x(x)).v
    }

    /// Closed interval outside which the profile vanishes identically, or
    /// `None` for the zero profile.
    fn support(&self) -> Option<(f64, f64)>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroProfile;

impl Profile1D for ZeroProfile {
    fn eval(&self, _x: Jet) -> Jet {
        Jet::constant(0.0)
    }

    fn support(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Polynomial times two smoothstep ends: `P(x) S((x-lo)/w) S((hi-x)/w)` on
/// `[lo, hi]`, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_poly")]
    pub poly: Vec<f64>,
    pub width: f64,
    #[serde(default)]
    pub step: Smoothstep,
}

fn default_poly() -> Vec<f64> {
    vec![1.0]
}

impl BumpSpec {
    pub fn new(lo: f64, hi: f64, width: f64, step: Smoothstep) -> Self {
        BumpSpec { lo, hi, poly: vec![1.0], width, step }
    }

    pub fn with_poly(mut self, poly: Vec<f64>) -> Self {
        self.poly = poly;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.width.is_finite()) {
            return Err(Error::InvalidData("bump parameters must be finite".into()));
        }
        if self.hi <= self.lo {
            return Err(Error::InvalidData(format!("bump support [{}, {}] is empty", self.lo, self.hi)));
        }
        if self.width <= 0.0 {
            return Err(Error::InvalidData("bump smoothstep width must be positive".into()));
        }
        if 2.0 * self.width > self.hi - self.lo + 1e-12 {
            return Err(Error::InvalidData(format!(
                "bump smoothstep width {} exceeds half the support length {}",
                self.width,
                self.hi - self.lo
            )));
        }
        if self.poly.is_empty() || self.poly.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidData("bump polynomial must have finite coefficients".into()));
        }
        Ok(())
    }
}

impl Profile1D for BumpSpec {
    fn eval(&self, x: Jet) -> Jet {
        if x.v <= self.lo || x.v >= self.hi {
            return Jet::constant(0.0);
        }
        let left = self.step.eval((x - self.lo) / self.width);
        let right = self.step.eval((-x + self.hi) / self.width);
        horner(&self.poly, x) * left * right
    }

    fn support(&self) -> Option<(f64, f64)> {
        if self.poly.iter().all(|&c| c == 0.0) {
            None
        } else {
            Some((self.lo, self.hi))
        }
    }
}

/// A plain polynomial on the whole line.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyProfile(pub Vec<f64>);

impl Profile1D for PolyProfile {
    fn eval(&self, x: Jet) -> Jet {
        horner(&self.0, x)
    }

    fn support(&self) -> Option<(f64, f64)> {
        self.0.iter().any(|&c| c != 0.0).then_some((0.0, f64::INFINITY))
    }
}

pub type SharedProfile = Arc<dyn Profile1D>;
