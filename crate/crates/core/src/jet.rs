//! Second-order forward-mode differentiation in two variables.
//!
//! A [`Jet`] carries a value together with its exact first and second partial
//! derivatives with respect to two independent variables. Univariate code
//! simply ignores the `y` slots. Test functions and metric coefficients are
//! evaluated through jets so that no finite differencing enters the weighted
//! norms.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl Jet {
    pub const fn constant(v: f64) -> Self {
        Jet { v, dx: 0.0, dy: 0.0, dxx: 0.0, dxy: 0.0, dyy: 0.0 }
    }

    /// The first independent variable at `x`.
    pub const fn var_x(x: f64) -> Self {
        Jet { v: x, dx: 1.0, dy: 0.0, dxx: 0.0, dxy: 0.0, dyy: 0.0 }
    }

    /// The second independent variable at `y`.
    pub const fn var_y(y: f64) -> Self {
        Jet { v: y, dx: 0.0, dy: 1.0, dxx: 0.0, dxy: 0.0, dyy: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.dx.is_finite()
            && self.dy.is_finite()
            && self.dxx.is_finite()
            && self.dxy.is_finite()
            && self.dyy.is_finite()
    }

    /// Composes a scalar function with known value `f`, derivative `df` and
    /// second derivative `d2f` (all evaluated at `self.v`).
    pub fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        Jet {
            v: f,
            dx: df * self.dx,
            dy: df * self.dy,
            dxx: d2f * self.dx * self.dx + df * self.dxx,
            dxy: d2f * self.dx * self.dy + df * self.dxy,
            dyy: d2f * self.dy * self.dy + df * self.dyy,
        }
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(self.v.ln(), inv, -inv * inv)
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    pub fn powi(self, n: i32) -> Self {
        match n {
            0 => Jet::constant(1.0),
            1 => self,
            _ => {
                let nf = n as f64;
                let p2 = self.v.powi(n - 2);
                let p1 = p2 * self.v;
                self.chain(p1 * self.v, nf * p1, nf * (nf - 1.0) * p2)
            }
        }
    }

    /// Real power. Requires `self.v > 0` unless the exponent is a
    /// non-negative integer.
    pub fn powf(self, p: f64) -> Self {
        if p.fract() == 0.0 && p.abs() < i32::MAX as f64 && p >= 0.0 {
            return self.powi(p as i32);
        }
        let f = self.v.powf(p);
        let df = p * self.v.powf(p - 1.0);
        let d2f = p * (p - 1.0) * self.v.powf(p - 2.0);
        self.chain(f, df, d2f)
    }

    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    pub fn scale(self, s: f64) -> Self {
        Jet {
            v: self.v * s,
            dx: self.dx * s,
            dy: self.dy * s,
            dxx: self.dxx * s,
            dxy: self.dxy * s,
            dyy: self.dyy * s,
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxx: self.dxx + o.dxx,
            dxy: self.dxy + o.dxy,
            dyy: self.dyy + o.dyy,
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet {
            v: self.v - o.v,
            dx: self.dx - o.dx,
            dy: self.dy - o.dy,
            dxx: self.dxx - o.dxx,
            dxy: self.dxy - o.dxy,
            dyy: self.dyy - o.dyy,
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
            dxx: self.dxx * o.v + 2.0 * self.dx * o.dx + self.v * o.dxx,
            dxy: self.dxy * o.v + self.dx * o.dy + self.dy * o.dx + self.v * o.dxy,
            dyy: self.dyy * o.v + 2.0 * self.dy * o.dy + self.v * o.dyy,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, c: f64) -> Jet {
        self.v += c;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, c: f64) -> Jet {
        self.v -= c;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self.scale(1.0 / c)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, j: Jet) -> Jet {
        j + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, j: Jet) -> Jet {
        -j + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j.scale(self)
    }
}

/// Horner evaluation of `sum c[k] x^k` on a jet.
pub fn horner(coeffs: &[f64], x: Jet) -> Jet {
    let mut acc = Jet::constant(0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}
