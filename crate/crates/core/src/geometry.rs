//! The warped-product end `dx²/x⁴ + ψ(x)h₀/x²`, the coefficients of the
//! conjugated radial operator, and the characteristic coordinate maps.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::poly::{Poly, RatPoly};

pub const DEFAULT_MAX_PSI_DEGREE: usize = 8;

/// Samples used to certify `ψ > 0` on the collar.
const POSITIVITY_SAMPLES: usize = 4096;

#[derive(Debug, Clone)]
pub struct WarpedMetric {
    n: u32,
    psi: RatPoly,
    psi_f: Poly,
    eps: f64,
}

impl WarpedMetric {
    pub fn new(n: u32, psi: &[f64], eps: f64) -> Result<Self> {
        Self::with_max_degree(n, psi, eps, DEFAULT_MAX_PSI_DEGREE)
    }

    pub fn with_max_degree(n: u32, psi: &[f64], eps: f64, max_degree: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidMetric(format!("dimension n = {n} must be at least 3")));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidMetric(format!("collar width eps = {eps} must be positive and finite")));
        }
        let psi_r = RatPoly::from_f64(psi)
            .ok_or_else(|| Error::InvalidMetric("psi coefficients must be finite".into()))?;
        if psi.first().copied() != Some(1.0) {
            return Err(Error::InvalidMetric(format!(
                "psi(0) must equal 1 (got {})",
                psi.first().copied().unwrap_or(0.0)
            )));
        }
        let degree = psi_r.degree().unwrap_or(0);
        if degree > max_degree {
            return Err(Error::InvalidMetric(format!(
                "psi has degree {degree}, above the maximum {max_degree}"
            )));
        }
        let psi_f = Poly::from(&psi_r);
        for i in 0..=POSITIVITY_SAMPLES {
            let x = eps * i as f64 / POSITIVITY_SAMPLES as f64;
            let v = psi_f.eval(x);
            if v.is_nan() || v <= 0.0 {
                return Err(Error::InvalidMetric(format!("psi({x}) = {v} is not positive on [0, eps]")));
            }
        }
        Ok(WarpedMetric { n, psi: psi_r, psi_f, eps })
    }

    /// Euclidean space of dimension `n` seen from infinity (`ψ ≡ 1`).
    pub fn euclidean(n: u32, eps: f64) -> Result<Self> {
        Self::new(n, &[1.0], eps)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn psi_coeffs(&self) -> &[f64] {
        &self.psi_f.coeffs
    }

    pub fn psi(&self, x: f64) -> f64 {
        self.psi_f.eval(x)
    }

    pub fn derive_coefficients(&self) -> DerivedCoefficients {
        DerivedCoefficients::new(self)
    }
}

/// Coefficients of the conjugated operator `F⁻¹ Δ F` in the radial variable.
///
/// With `a = (n-1)/2`, the potential is `B = N/ψ²` where
/// `N = B₀ψ² + (a/2)x²ψ''ψ + (a(a-2)/4)x²ψ'² - (n-3)(a/2)xψ'ψ` and
/// `B₀ = (n-1)(n-3)/4`. `N` is kept as an exact rational polynomial.
#[derive(Debug, Clone)]
pub struct DerivedCoefficients {
    n: u32,
    a: f64,
    eps: f64,
    psi: Poly,
    psi_exact: RatPoly,
    numer_exact: RatPoly,
    numer: Poly,
}

impl DerivedCoefficients {
    fn new(metric: &WarpedMetric) -> Self {
        let n = metric.n;
        let ni = BigInt::from(n);
        let a = BigRational::new(&ni - 1, BigInt::from(2));
        let b0 = BigRational::new((&ni - 1) * (&ni - 3), BigInt::from(4));
        let half_a = &a / BigRational::from_integer(BigInt::from(2));
        let quad = &a * (&a - BigRational::from_integer(BigInt::from(2))) / BigRational::from_integer(BigInt::from(4));
        let lin = -(BigRational::from_integer(&ni - 3) * &half_a);

        let p = &metric.psi;
        let dp = p.derivative();
        let ddp = dp.derivative();
        let x1 = RatPoly::monomial(1);
        let x2 = RatPoly::monomial(2);

        let t0 = (p * p).scale(&b0);
        let t1 = (&(&x2 * &ddp) * p).scale(&half_a);
        let t2 = (&(&x2 * &dp) * &dp).scale(&quad);
        let t3 = (&(&x1 * &dp) * p).scale(&lin);
        let numer_exact = &(&(&t0 + &t1) + &t2) + &t3;
        let numer = Poly::from(&numer_exact);

        DerivedCoefficients {
            n,
            a: a.to_f64().unwrap_or(f64::NAN),
            eps: metric.eps,
            psi: metric.psi_f.clone(),
            psi_exact: metric.psi.clone(),
            numer_exact,
            numer,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Collar width of the metric these coefficients came from.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `(n-1)/2`.
    pub fn half_dim(&self) -> f64 {
        self.a
    }

    pub fn psi(&self, x: Jet) -> Jet {
        self.psi.eval_jet(x)
    }

    pub fn phi(&self, x: Jet) -> Jet {
        self.psi(x).recip()
    }

    /// `x^a ψ^{-a/2}`. Requires `x > 0` unless `a` is an integer.
    pub fn conformal_factor(&self, x: Jet) -> Jet {
        x.powf(self.a) * self.psi(x).powf(-0.5 * self.a)
    }

    /// `a ψ'/ψ`, the first-order coefficient of the radial operator.
    pub fn first_order(&self, x: Jet) -> Jet {
        derivative_poly(&self.psi).eval_jet(x) / self.psi(x) * self.a
    }

    pub fn potential_b(&self, x: Jet) -> Jet {
        let p = self.psi(x);
        self.numer.eval_jet(x) / (p * p)
    }

    pub fn b_value(&self, x: f64) -> f64 {
        let p = self.psi.eval(x);
        self.numer.eval(x) / (p * p)
    }

    pub fn phi_value(&self, x: f64) -> f64 {
        1.0 / self.psi.eval(x)
    }

    /// `λφ(x) + B(x)`, the zeroth-order coefficient of one mode.
    pub fn mode_potential(&self, lambda: f64, x: f64) -> f64 {
        let p = self.psi.eval(x);
        (lambda * p + self.numer.eval(x)) / (p * p)
    }

    /// Exact value of `B(0)`.
    pub fn b_at_zero(&self) -> BigRational {
        let psi0 = self.psi_exact.coeff(0);
        if psi0.is_zero() {
            return BigRational::zero();
        }
        self.numer_exact.coeff(0) / (&psi0 * &psi0)
    }

    /// Numerator `N` of `B = N/ψ²`, exact.
    pub fn potential_numerator(&self) -> &RatPoly {
        &self.numer_exact
    }
}

fn derivative_poly(p: &Poly) -> Poly {
    Poly::new(p.coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
}

/// `x = 2μν/(μ+ν)`. Symmetric in its arguments bit for bit.
pub fn x_of(mu: f64, nu: f64) -> f64 {
    let s = mu + nu;
    if s == 0.0 {
        0.0
    } else {
        2.0 * (mu * nu) / s
    }
}

/// `x = (r² − τ²)/(2r)`.
pub fn x_of_rotated(tau: f64, r: f64) -> f64 {
    (r - tau) * (r + tau) / (2.0 * r)
}

/// A point `(μ, ν)` of the closed quadrant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharCoords {
    pub mu: f64,
    pub nu: f64,
}

impl CharCoords {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !(mu >= 0.0 && nu >= 0.0 && mu.is_finite() && nu.is_finite()) {
            return Err(Error::OutsidePatch(format!("(mu, nu) = ({mu}, {nu}) must be finite and nonnegative")));
        }
        Ok(CharCoords { mu, nu })
    }

    /// `μ = x/(1 − tx)`, `ν = x/(1 + tx)`.
    pub fn from_tx(t: f64, x: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::OutsidePatch(format!("x = {x} must be positive")));
        }
        let tx = t * x;
        if !(tx.abs() < 1.0) {
            return Err(Error::OutsidePatch(format!("|t| = {} must be below 1/x = {}", t.abs(), 1.0 / x)));
        }
        Ok(CharCoords { mu: x / (1.0 - tx), nu: x / (1.0 + tx) })
    }

    /// Inverse of [`CharCoords::from_tx`]; needs `μ, ν > 0`.
    pub fn to_tx(&self) -> Result<(f64, f64)> {
        if !(self.mu > 0.0 && self.nu > 0.0) {
            return Err(Error::OutsidePatch(format!(
                "(t, x) undefined on the edges: mu = {}, nu = {}",
                self.mu, self.nu
            )));
        }
        Ok((self.t(), self.x()))
    }

    pub fn x(&self) -> f64 {
        x_of(self.mu, self.nu)
    }

    /// `(μ − ν)/(2μν)`.
    pub fn t(&self) -> f64 {
        (self.mu - self.nu) / (2.0 * self.mu * self.nu)
    }

    pub fn r(&self) -> f64 {
        self.mu + self.nu
    }

    pub fn tau(&self) -> f64 {
        self.nu - self.mu
    }

    pub fn s_plus(&self) -> f64 {
        -1.0 / self.mu
    }

    pub fn s_minus(&self) -> f64 {
        1.0 / self.nu
    }

    pub fn from_rotated(tau: f64, r: f64) -> Result<Self> {
        CharCoords::new(0.5 * (r - tau), 0.5 * (r + tau))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_three_has_trivial_coefficients() {
        let c = WarpedMetric::euclidean(3, 1.0).unwrap().derive_coefficients();
        for x in [0.1, 0.4, 0.9] {
            let j = Jet::var_x(x);
            assert!((c.conformal_factor(j).v - x).abs() < 1e-15);
            assert_eq!(c.phi(j).v, 1.0);
            assert_eq!(c.first_order(j).v, 0.0);
            assert_eq!(c.potential_b(j).v, 0.0);
        }
        assert!(c.potential_numerator().is_zero());
    }

    #[test]
    fn b_at_zero_is_exact() {
        let c = WarpedMetric::euclidean(5, 1.0).unwrap().derive_coefficients();
        assert_eq!(c.b_at_zero(), BigRational::from_integer(BigInt::from(2)));
        let c = WarpedMetric::new(4, &[1.0, 0.3, -0.1], 1.0).unwrap().derive_coefficients();
        assert_eq!(c.b_at_zero(), BigRational::new(BigInt::from(3), BigInt::from(4)));
    }

    #[test]
    fn worked_potentials() {
        let c = WarpedMetric::new(3, &[1.0, 1.0], 1.0).unwrap().derive_coefficients();
        let c2 = WarpedMetric::new(3, &[1.0, 0.0, 1.0], 1.0).unwrap().derive_coefficients();
        for x in [0.05, 0.3, 0.8] {
            let want = -x * x / (4.0 * (1.0 + x) * (1.0 + x));
            assert!((c.b_value(x) - want).abs() < 1e-15);
            let want2 = x * x / ((1.0 + x * x) * (1.0 + x * x));
            assert!((c2.b_value(x) - want2).abs() < 1e-15);
        }
    }

    #[test]
    fn phi_times_psi_is_one() {
        let m = WarpedMetric::new(5, &[1.0, -0.25], 2.0).unwrap();
        let c = m.derive_coefficients();
        for i in 0..=200 {
            let x = 2.0 * i as f64 / 200.0;
            assert!((c.phi_value(x) * m.psi(x) - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn rejects_bad_metrics() {
        let e = WarpedMetric::new(3, &[2.0], 1.0).unwrap_err();
        assert!(e.to_string().contains("psi(0) must equal 1"));
        assert!(WarpedMetric::new(2, &[1.0], 1.0).is_err());
        assert!(WarpedMetric::new(3, &[1.0, -2.0], 1.0).is_err());
        assert!(WarpedMetric::new(3, &[1.0, 0., 0., 0., 0., 0., 0., 0., 0., 1e-3], 1.0).is_err());
    }

    #[test]
    fn coordinate_examples() {
        let p = CharCoords::from_tx(0.0, 0.25).unwrap();
        assert_eq!((p.mu, p.nu), (0.25, 0.25));
        let q = CharCoords::new(0.2, 0.4).unwrap();
        assert!((q.x() - 0.16 / 0.6).abs() < 1e-15);
        assert!((q.t() + 1.25).abs() < 1e-14);
        assert!((x_of_rotated(0.2, 0.6) - q.x()).abs() < 1e-15);
        assert!(CharCoords::from_tx(4.0, 0.25).is_err());
        assert!(CharCoords::from_tx(0.0, 0.0).is_err());
    }
}
