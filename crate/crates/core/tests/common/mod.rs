//! Independent reference computations for the integration and acceptance
//! tests. Nothing here calls into the library's derivation code.

#![allow(dead_code)]

use rand::Rng;

/// Plain polynomial in `x`, lowest coefficient first.
#[derive(Debug, Clone)]
pub struct TestPoly(pub Vec<f64>);

impl TestPoly {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let degree = rng.gen_range(1..=5usize);
        let mut c: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        // bounded away from zero for x < 1/2, so B·v carries weight
        c[0] = rng.gen_range(1.5..=2.5);
        TestPoly(c)
    }
}

/// 6th-order central first and second derivatives.
pub fn d1(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let c = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
    (1..=3).map(|k| c[k - 1] * (f(x + k as f64 * h) - f(x - k as f64 * h))).sum::<f64>() / h
}

pub fn d2(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let c = [3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];
    let centre = -49.0 / 18.0 * f(x);
    (centre + (1..=3).map(|k| c[k - 1] * (f(x + k as f64 * h) + f(x - k as f64 * h))).sum::<f64>()) / (h * h)
}

/// Residual of the conjugation identity for one test function `v`:
/// `x⁻²F⁻¹L(Fv) + x²v'' + 2xv' − B(x)v`, with `L` the radial part of the
/// positive Laplacian of `dx²/x⁴ + ψh₀/x²`, written from the volume density
/// `ρ = x^{-(n+1)} ψ^{(n-1)/2}` as `L g = −ρ⁻¹(ρ x⁴ g')'`, and all
/// derivatives taken by finite differences.
///
/// Returns `(residual, scale)` where `scale` bounds the magnitude of the
/// individual terms.
pub fn conjugation_residual(n: u32, psi: &dyn Fn(f64) -> f64, b: &dyn Fn(f64) -> f64, v: &TestPoly, x: f64) -> (f64, f64) {
    let a = (n as f64 - 1.0) / 2.0;
    let h = 2e-3 * x.max(0.05);
    let conformal = |y: f64| y.powf(a) * psi(y).powf(-a / 2.0);
    let rho = |y: f64| y.powf(-(n as f64) - 1.0) * psi(y).powf(a);
    let g = |y: f64| conformal(y) * v.eval(y);
    let flux = |y: f64| rho(y) * y.powi(4) * d1(&g, y, h);
    let lg = -d1(&flux, x, h) / rho(x);
    let vv = |y: f64| v.eval(y);
    let v1 = d1(&vv, x, h);
    let v2 = d2(&vv, x, h);
    let conjugated = lg / (x * x * conformal(x));
    let bv = b(x) * v.eval(x);
    let residual = conjugated + x * x * v2 + 2.0 * x * v1 - bv;
    let scale = conjugated.abs() + (x * x * v2).abs() + (2.0 * x * v1).abs() + bv.abs();
    (residual, scale)
}

/// Leapfrog solution of `U_tt = U_rr` on `r ≥ 0` with `U(t, 0) = 0`,
/// `U(0, r) = 0`, `U_t(0, r) = r f(r)`; `U = r·u` for the radial wave with
/// zero displacement and velocity `f`. Returns `U(t, r)`.
pub fn leapfrog_ru(f: &dyn Fn(f64) -> f64, t: f64, r: f64, dr: f64) -> f64 {
    let courant = 0.5;
    let dt = courant * dr;
    let steps = (t / dt).round() as usize;
    let dt = t / steps as f64;
    let c2 = (dt / dr) * (dt / dr);
    let len = ((r + t) / dr).ceil() as usize + 4;
    let g: Vec<f64> = (0..=len).map(|i| i as f64 * dr * f(i as f64 * dr)).collect();
    let mut prev = vec![0.0; len + 1];
    // Taylor start: U(dt) = dt g + dt³/6 g''
    let mut cur: Vec<f64> = (0..=len)
        .map(|i| {
            if i == 0 || i == len {
                0.0
            } else {
                let gxx = (g[i + 1] - 2.0 * g[i] + g[i - 1]) / (dr * dr);
                dt * g[i] + dt * dt * dt / 6.0 * gxx
            }
        })
        .collect();
    let mut next = vec![0.0; len + 1];
    for _ in 1..steps {
        for i in 1..len {
            next[i] = 2.0 * cur[i] - prev[i] + c2 * (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    let k = r / dr;
    let i = k.floor() as usize;
    let w = k - i as f64;
    (1.0 - w) * cur[i] + w * cur[i + 1]
}
