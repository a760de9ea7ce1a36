//! Closed-form test functions of `(μ, ν)` carrying exact first and second
//! partials. Rotated coordinates `r = μ+ν`, `τ = ν−μ` are formed inside the
//! jets, so cone-supported functions live in the same family.

use std::fmt;

use rand::Rng;

use crate::jet::Jet;
use crate::profile::{BumpSpec, Profile1D, Smoothstep};

pub trait TestFunction2D: Send + Sync + fmt::Debug {
    /// Value and partials at `(μ, ν)`; `dx` is `∂_μ`, `dy` is `∂_ν`.
    fn jet(&self, mu: f64, nu: f64) -> Jet;

    fn value(&self, mu: f64, nu: f64) -> f64 {
        self.jet(mu, nu).v
    }

    fn label(&self) -> String;

    /// Values of `r = μ+ν` where the function is not analytic.
    fn radial_breaks(&self) -> Vec<f64> {
        Vec::new()
    }
}

fn mu_nu(mu: f64, nu: f64) -> (Jet, Jet) {
    (Jet::var_x(mu), Jet::var_y(nu))
}

fn positive_part(j: Jet) -> Jet {
    if j.v > 0.0 {
        j
    } else {
        Jet::constant(0.0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroFunction;

impl TestFunction2D for ZeroFunction {
    fn jet(&self, _mu: f64, _nu: f64) -> Jet {
        Jet::constant(0.0)
    }

    fn label(&self) -> String {
        "zero".into()
    }
}

/// `(μν)^p · Σ c_ij (μ/L)^i (ν/L)^j · b(μ+ν)` with an optional bump `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerPolynomial {
    pub power: i32,
    /// `coeffs[i][j]` multiplies `(μ/L)^i (ν/L)^j`.
    pub coeffs: Vec<Vec<f64>>,
    pub length: f64,
    pub bump: Option<BumpSpec>,
}

impl CornerPolynomial {
    pub fn monomial(power: i32) -> Self {
        CornerPolynomial { power, coeffs: vec![vec![1.0]], length: 1.0, bump: None }
    }

    /// Degree `≤ 3` in each variable with coefficients uniform in `[−1, 1]`;
    /// half of the members carry an `r`-bump inside `(0, 2L)`.
    pub fn random<R: Rng>(rng: &mut R, power: i32, length: f64) -> Self {
        let degree = rng.gen_range(0..=3usize);
        let coeffs = (0..=degree)
            .map(|i| (0..=degree - i).map(|_| rng.gen_range(-1.0..=1.0)).collect())
            .collect();
        let bump = rng.gen_bool(0.5).then(|| {
            let lo = rng.gen_range(0.0..0.8) * length;
            let hi = rng.gen_range(lo + 0.4 * length..=2.0 * length);
            let width = rng.gen_range(0.25..=0.5) * (hi - lo);
            BumpSpec::new(lo, hi, width, Smoothstep::Exp)
        });
        CornerPolynomial { power, coeffs, length, bump }
    }
}

impl TestFunction2D for CornerPolynomial {
    fn jet(&self, mu: f64, nu: f64) -> Jet {
        let (m, n) = mu_nu(mu, nu);
        let (sm, sn) = (m / self.length, n / self.length);
        let mut poly = Jet::constant(0.0);
        let mut mi = Jet::constant(1.0);
        for row in &self.coeffs {
            let mut nj = Jet::constant(1.0);
            for &c in row {
                poly = poly + mi * nj * c;
                nj = nj * sn;
            }
            mi = mi * sm;
        }
        let mut out = (m * n).powi(self.power) * poly;
        if let Some(b) = &self.bump {
            out = out * b.eval(m + n);
        }
        out
    }

    fn value(&self, mu: f64, nu: f64) -> f64 {
        let (sm, sn) = (mu / self.length, nu / self.length);
        let poly: f64 = self
            .coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, row| acc * sm + row.iter().rev().fold(0.0, |a, &c| a * sn + c));
        let bump = self.bump.as_ref().map_or(1.0, |b| b.value(mu + nu));
        (mu * nu).powi(self.power) * poly * bump
    }

    fn label(&self) -> String {
        let bump = self.bump.as_ref().map_or(String::new(), |b| format!(" bump[{:.3},{:.3}]", b.lo, b.hi));
        format!("corner-poly p={} deg={}{bump}", self.power, self.coeffs.len().saturating_sub(1))
    }

    fn radial_breaks(&self) -> Vec<f64> {
        self.bump.as_ref().map_or_else(Vec::new, |b| vec![b.lo, b.lo + b.width, b.hi - b.width, b.hi])
    }
}

/// `g(r)(1 + ε τ²/r²)` with `g(r) = r^p (a − r)³₊`: a small angular
/// perturbation of a radial function, which makes the diagonal and
/// cross-derivative weights of the rotated decay estimate compete.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearRadial {
    pub power: i32,
    pub edge: f64,
    pub eps: f64,
}

impl TestFunction2D for NearRadial {
    fn jet(&self, mu: f64, nu: f64) -> Jet {
        let (m, n) = mu_nu(mu, nu);
        let r = m + n;
        if r.v <= 0.0 {
            return Jet::constant(0.0);
        }
        let tau = n - m;
        let g = r.powi(self.power) * positive_part(-r + self.edge).powi(3);
        g * (1.0 + (tau / r).powi(2) * self.eps)
    }

    fn label(&self) -> String {
        format!("near-radial p={} a={} eps={}", self.power, self.edge, self.eps)
    }

    fn radial_breaks(&self) -> Vec<f64> {
        vec![self.edge]
    }
}

/// `((r − a)(b − r))₊^q · (4μν/r²)^k`, supported in the cone `|τ| ≤ r` and
/// the shell `a ≤ r ≤ b`. `4μν/r² = (r² − τ²)/r²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeFunction {
    pub lo: f64,
    pub hi: f64,
    pub radial_power: i32,
    pub angular_power: i32,
}

impl ConeFunction {
    pub fn new(lo: f64, hi: f64) -> Self {
        ConeFunction { lo, hi, radial_power: 4, angular_power: 4 }
    }

    pub fn r_range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

impl TestFunction2D for ConeFunction {
    fn jet(&self, mu: f64, nu: f64) -> Jet {
        let (m, n) = mu_nu(mu, nu);
        let r = m + n;
        if r.v <= self.lo || r.v >= self.hi {
            return Jet::constant(0.0);
        }
        let shell = ((r - self.lo) * (-r + self.hi)).powi(self.radial_power);
        let angle = (m * n * 4.0 / (r * r)).powi(self.angular_power);
        shell * angle
    }

    fn label(&self) -> String {
        format!("cone [{},{}] q={} k={}", self.lo, self.hi, self.radial_power, self.angular_power)
    }

    fn radial_breaks(&self) -> Vec<f64> {
        vec![self.lo, self.hi]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check_partials(f: &dyn TestFunction2D, mu: f64, nu: f64) {
        let h = 1e-4;
        let j = f.jet(mu, nu);
        let v = |a: f64, b: f64| f.value(a, b);
        let dmu = (v(mu + h, nu) - v(mu - h, nu)) / (2.0 * h);
        let dnu = (v(mu, nu + h) - v(mu, nu - h)) / (2.0 * h);
        let dmn = (v(mu + h, nu + h) - v(mu + h, nu - h) - v(mu - h, nu + h) + v(mu - h, nu - h)) / (4.0 * h * h);
        let dmm = (v(mu + h, nu) - 2.0 * j.v + v(mu - h, nu)) / (h * h);
        let scale = 1.0 + j.v.abs() + j.dx.abs() + j.dy.abs() + j.dxx.abs() + j.dxy.abs();
        for (exact, fd) in [(j.dx, dmu), (j.dy, dnu), (j.dxy, dmn), (j.dxx, dmm)] {
            assert!((exact - fd).abs() < 2e-5 * scale, "{} at ({mu},{nu}): {exact} vs {fd}", f.label());
        }
    }

    #[test]
    fn jets_match_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f = CornerPolynomial::random(&mut rng, 2, 1.0);
            check_partials(&f, 0.37, 0.61);
            let fast = f.value(0.37, 0.61);
            assert!((fast - f.jet(0.37, 0.61).v).abs() <= 1e-14 * (1.0 + fast.abs()));
        }
        check_partials(&NearRadial { power: 3, edge: 0.8, eps: 0.1 }, 0.2, 0.3);
        check_partials(&ConeFunction::new(0.3, 0.6), 0.2, 0.25);
    }

    #[test]
    fn cone_function_support() {
        let u = ConeFunction::new(0.3, 0.6);
        assert_eq!(u.value(0.1, 0.1), 0.0);
        assert_eq!(u.value(0.0, 0.45), 0.0);
        assert_eq!(u.value(0.4, 0.4), 0.0);
        assert!(u.value(0.2, 0.25) > 0.0);
    }
}
