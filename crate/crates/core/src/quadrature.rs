//! Gauss–Legendre panels, panel-doubling convergence, and adaptive
//! Gauss–Kronrod integration.

use crate::error::{Error, Result};

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are the roots of `P_n`, located by Newton iteration from the
    /// Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + h * p as f64;
                let hi = if p + 1 == panels { b } else { lo + h };
                self.integrate(lo, hi, &mut f)
            })
            .sum()
    }

    /// Quadrature points `(x, weight)` of the composite rule.
    pub fn composite_points(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.len());
        for p in 0..panels {
            let lo = a + h * p as f64;
            let hi = if p + 1 == panels { b } else { lo + h };
            out.extend(self.mapped(lo, hi));
        }
        out
    }

    /// Composite points with `panels` panels on each piece of `[a, b]` cut at
    /// the interior `breaks`, so kinks and flat tails sit on panel edges.
    pub fn composite_points_split(&self, a: f64, b: f64, panels: usize, breaks: &[f64]) -> Vec<(f64, f64)> {
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut out = Vec::new();
        let mut lo = a;
        for hi in cuts.into_iter().chain(std::iter::once(b)) {
            out.extend(self.composite_points(lo, hi, panels));
            lo = hi;
        }
        out
    }

    /// Iterated composite rule over `{a <= x <= b, lo(x) <= y <= hi(x)}`.
    pub fn composite_2d<F, L, H>(
        &self,
        (a, b): (f64, f64),
        lo: L,
        hi: H,
        (px, py): (usize, usize),
        mut f: F,
    ) -> f64
    where
        F: FnMut(f64, f64) -> f64,
        L: Fn(f64) -> f64,
        H: Fn(f64) -> f64,
    {
        let mut total = 0.0;
        for (x, wx) in self.composite_points(a, b, px) {
            let (ylo, yhi) = (lo(x), hi(x));
            if yhi <= ylo {
                continue;
            }
            total += wx * self.composite(ylo, yhi, py, |y| f(x, y));
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of a panel-doubling study.
#[derive(Debug, Clone, PartialEq)]
pub struct Converged {
    pub values: Vec<f64>,
    /// Panel multiplier at which the values settled.
    pub panels: usize,
    /// Largest relative change seen in the final doubling.
    pub rel_change: f64,
}

impl Converged {
    pub fn value(&self) -> f64 {
        self.values[0]
    }
}

/// Evaluates `eval(panels)` with doubling panel counts until every component
/// changes by less than `tol` relative to `max(|value|, scale)`.
pub fn converge<F>(mut eval: F, start: usize, max: usize, tol: f64, scale: f64) -> Result<Converged>
where
    F: FnMut(usize) -> Vec<f64>,
{
    let mut panels = start.max(1);
    let mut prev = eval(panels);
    let mut last_change = f64::INFINITY;
    loop {
        let next_panels = panels * 2;
        if next_panels > max {
            return Err(Error::Quadrature(format!(
                "no convergence to {tol:e} with {panels} panels (last change {last_change:e})"
            )));
        }
        let next = eval(next_panels);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
        let change = relative_change(&prev, &next, scale);
        if change <= tol {
            return Ok(Converged { values: next, panels: next_panels, rel_change: change });
        }
        last_change = change;
        prev = next;
        panels = next_panels;
    }
}

fn relative_change(a: &[f64], b: &[f64], scale: f64) -> f64 {
    // an entry that is roundoff next to its siblings (an identically zero
    // gradient, say) is judged against the vector's own magnitude
    let floor = 64.0 * f64::EPSILON * b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).abs();
            let s = y.abs().max(x.abs()).max(scale).max(floor);
            if d == 0.0 {
                0.0
            } else if s == 0.0 {
                f64::INFINITY
            } else {
                d / s
            }
        })
        .fold(0.0, f64::max)
}

const GK_XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * GK_WK[7];
    let mut gauss = fc * GK_WG[3];
    for j in 0..7 {
        let x = h * GK_XK[j];
        let s = f(c - x) + f(c + x);
        kron += GK_WK[j] * s;
        if j % 2 == 1 {
            gauss += GK_WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration to absolute tolerance `tol`.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut stack = vec![(a, b, tol, 0u32)];
    let mut total = 0.0;
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let (val, err) = gk15(&mut f, lo, hi);
        if !val.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        if err <= t || (hi - lo).abs() < 1e-14 * (b - a).abs() {
            total += val;
        } else if depth >= 60 {
            return Err(Error::Quadrature(format!("adaptive recursion limit on [{lo}, {hi}]")));
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * t, depth + 1));
            stack.push((mid, hi, 0.5 * t, depth + 1));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        for n in 1..=12 {
            let rule = GaussLegendre::new(n);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got = rule.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn triangle_area_by_iterated_rule() {
        let rule = GaussLegendre::new(4);
        let area = rule.composite_2d((0.0, 1.0), |x| x, |_| 1.0, (2, 2), |_, _| 1.0);
        assert!((area - 0.5).abs() < 1e-14);
    }

    #[test]
    fn split_points_integrate_a_kink_exactly() {
        let rule = GaussLegendre::new(3);
        let kink = |x: f64| (x - 0.3).max(0.0);
        let pts = rule.composite_points_split(0.0, 1.0, 1, &[0.3, 2.0]);
        let got: f64 = pts.iter().map(|&(x, w)| w * kink(x)).sum();
        assert!((got - 0.245).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let v = adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-11).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn doubling_reports_non_convergence() {
        // A discontinuous integrand converges only slowly under panel doubling.
        let rule = GaussLegendre::new(2);
        let r = converge(
            |p| vec![rule.composite(0.0, 1.0, p, |x| if x < 1.0 / 3.0 { 1.0 } else { 0.0 })],
            1,
            8,
            1e-12,
            0.0,
        );
        assert!(r.is_err());
    }
}
