//! Acceptance suite: one PASS/FAIL line per criterion, with timing. Exits
//! nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use radfield::geometry::{x_of, DerivedCoefficients, WarpedMetric};
use radfield::goursat::{
    build_diagonal_data, discrete_residual, solve_mode, CharGrid, CoefficientTable, DiagonalData, ModeSolution,
};
use radfield::inequality::carleman::{carleman_sweep, default_corpus};
use radfield::inequality::lemmas::QuadSpec;
use radfield::inequality::{LemmaContext, LemmaRegistry};
use radfield::profile::{BumpSpec, Profile1D, Smoothstep, ZeroProfile};
use radfield::radiation::{extract_field, support_threshold, Direction};

use common::{conjugation_residual, TestPoly};

/// An odd-data solve kept for the antisymmetry criterion.
struct OddSolve {
    label: String,
    defect: f64,
    residual: f64,
    max_abs: f64,
}

#[derive(Default)]
struct Suite {
    odd: Vec<OddSolve>,
    failures: usize,
}

impl Suite {
    fn record_odd(&mut self, label: String, sol: &ModeSolution, coeffs: &DerivedCoefficients) {
        let r = discrete_residual(sol, coeffs, sol.lambda, None);
        self.odd.push(OddSolve { label, defect: sol.antisymmetry_defect(), residual: r.max, max_abs: sol.max_abs() });
    }

    fn report(&mut self, id: u32, name: &str, limit: Duration, start: Instant, pass: bool, detail: String) {
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let ok = pass && in_time;
        if !ok {
            self.failures += 1;
        }
        let timing = if in_time { String::new() } else { format!(" [over the {:.0} s budget]", limit.as_secs_f64()) };
        println!(
            "{} criterion {id} {name}: {detail} ({:.2} s){timing}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
}

fn odd_solve(coeffs: &DerivedCoefficients, lambda: f64, grid: &CharGrid, f2: &dyn Profile1D) -> ModeSolution {
    let data = build_diagonal_data(coeffs, &ZeroProfile, f2, grid).expect("diagonal data");
    let table = CoefficientTable::new(coeffs, lambda, grid).expect("coefficient table");
    solve_mode(&table, &data, None).expect("solve")
}

fn conjugation(suite: &mut Suite) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for (n, psi) in [(3, vec![1.0]), (3, vec![1.0, 1.0]), (4, vec![1.0, 0.0, 1.0]), (5, vec![1.0, -0.25])] {
        let metric = WarpedMetric::new(n, &psi, 0.5).expect("metric");
        let coeffs = metric.derive_coefficients();
        for _ in 0..50 {
            let v = TestPoly::random(&mut rng);
            for k in 1..=9 {
                let x = 0.05 * k as f64;
                let (res, scale) =
                    conjugation_residual(n, &|y| metric.psi(y), &|y| coeffs.b_value(y), &v, x);
                worst = worst.max(res.abs() / scale);
            }
        }
    }
    let detail = format!("worst relative mismatch {worst:.2e} (limit 1e-6) over 4 metrics x 50 polynomials");
    suite.report(1, "conjugation identity", Duration::from_secs(10), start, worst < 1e-6, detail);
}

fn goursat_convergence(suite: &mut Suite) {
    let start = Instant::now();
    // manufactured w = μ²ν² on a warped metric with a nonzero mode potential
    let coeffs = WarpedMetric::new(4, &[1.0, 0.0, 1.0], 2.0).expect("metric").derive_coefficients();
    let lambda = 2.0;
    let fc = coeffs.clone();
    let forcing = move |mu: f64, nu: f64| {
        (mu + nu).powi(2) * 4.0 * mu * nu - fc.mode_potential(lambda, x_of(mu, nu)) * (mu * nu).powi(2)
    };
    let mut errors = Vec::new();
    for n in [32usize, 64, 128] {
        let grid = CharGrid::new(0.5, n, None).expect("grid");
        let table = CoefficientTable::new(&coeffs, lambda, &grid).expect("table");
        let data = DiagonalData::from_fns(&grid, |m| m.powi(4), |m| 2.0 * m.powi(3));
        let sol = solve_mode(&table, &data, Some(&forcing)).expect("solve");
        let mut e: f64 = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                e = e.max((sol.at(i, j) - (grid.node(i) * grid.node(j)).powi(2)).abs());
            }
        }
        errors.push(e);
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let orders_ok = orders.iter().all(|o| (o - 2.0).abs() <= 0.2);

    // (μ⁴+ν⁴)/2 solves ∂_μ∂_ν w = 0; the only deviation comes from the
    // pinned corner, O(δ⁴), so the smallest admissible cutoff is used
    let flat = WarpedMetric::euclidean(3, 2.0).expect("metric").derive_coefficients();
    let n = 512;
    let grid = CharGrid::new(0.5, n, Some(2.0 * 0.5 / n as f64)).expect("grid");
    let table = CoefficientTable::new(&flat, 0.0, &grid).expect("table");
    let data = DiagonalData::from_fns(&grid, |m| m.powi(4), |m| 2.0 * m.powi(3));
    let sol = solve_mode(&table, &data, None).expect("solve");
    let mut exact_err: f64 = 0.0;
    let mut interior_err: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            let e = (sol.at(i, j) - 0.5 * (grid.node(i).powi(4) + grid.node(j).powi(4))).abs();
            exact_err = exact_err.max(e);
            if i > 0 && j > 0 {
                interior_err = interior_err.max(e);
            }
        }
    }
    let scale = sol.max_abs();
    let res = discrete_residual(&sol, &flat, 0.0, None);
    let exact_ok = exact_err <= 1e-10 * scale && res.max <= 1e-10 * res.scale;
    let detail = format!(
        "orders {:.3}, {:.3} (2 +- 0.2); (mu^4+nu^4)/2 at N=512, cutoff 2h: max error {:.2e}, off the edges {:.2e}, residual {:.2e} (limit 1e-10, scaled)",
        orders[0],
        orders[1],
        exact_err / scale,
        interior_err / scale,
        res.max / res.scale
    );
    suite.report(2, "Goursat convergence", Duration::from_secs(30), start, orders_ok && exact_ok, detail);
}

fn euclidean_bump() -> BumpSpec {
    BumpSpec::new(0.5, 1.0, 0.25, Smoothstep::Poly4)
}

/// `−(s/2) f(|s|)` with `f(r) = g(1/r)/r²`, the radial velocity whose
/// conjugated diagonal data is the `x`-profile `g`.
fn flat_field(g: &BumpSpec, s: f64) -> f64 {
    let r = s.abs();
    -0.5 * s * g.value(1.0 / r) / (r * r)
}

fn pipeline_vs_oracle(suite: &mut Suite) {
    let start = Instant::now();
    let coeffs = WarpedMetric::euclidean(3, 2.4).expect("metric").derive_coefficients();
    let grid = CharGrid::new(1.2, 256, None).expect("grid");
    let g = euclidean_bump();
    let sol = odd_solve(&coeffs, 0.0, &grid, &g);
    let field = extract_field(&sol, Direction::Forward, 1).expect("field");
    let exact: Vec<f64> = field.samples.iter().map(|p| flat_field(&g, p.s)).collect();
    let peak = exact.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let err = field.samples.iter().zip(&exact).map(|(p, e)| (p.value - e).abs()).fold(0.0, f64::max) / peak;
    suite.record_odd("flat bump N=256".into(), &sol, &coeffs);
    let detail = format!("max relative field error {err:.2e} over {} samples (limit 1e-3)", exact.len());
    suite.report(3, "pipeline vs flat closed form", Duration::from_secs(60), start, err <= 1e-3, detail);
}

fn support_theorem(suite: &mut Suite) {
    let start = Instant::now();
    let flat = WarpedMetric::euclidean(3, 2.4).expect("metric").derive_coefficients();
    let (t, n) = (1.2, 256);
    let grid = CharGrid::new(t, n, None).expect("grid");
    let sol = odd_solve(&flat, 0.0, &grid, &euclidean_bump());
    let th = support_threshold(&extract_field(&sol, Direction::Forward, 1).expect("field"), 1e-8);
    let flat_ok = (th.mu_star - 0.5).abs() <= t / n as f64;
    let mut detail = format!("flat mu* = {:.6} (|mu* - 0.5| <= {:.5})", th.mu_star, t / n as f64);

    let coeffs = WarpedMetric::new(3, &[1.0, 0.0, 1.0], 1.6).expect("metric").derive_coefficients();
    let t = 0.8;
    let bump = BumpSpec::new(0.4, 0.6, 0.1, Smoothstep::Poly4);
    let mut warped_ok = true;
    for lambda in [0.0, 2.0] {
        let mut stars = Vec::new();
        for n in [128usize, 256] {
            let grid = CharGrid::new(t, n, None).expect("grid");
            let sol = odd_solve(&coeffs, lambda, &grid, &bump);
            let th = support_threshold(&extract_field(&sol, Direction::Forward, 2).expect("field"), 1e-8);
            let h = grid.h();
            // finite speed from below, support theorem from above
            warped_ok &= th.mu_star >= 0.4 - h * (1.0 + 1e-9) && th.mu_star <= 0.4 + 2.0 * h * (1.0 + 1e-9);
            stars.push(th.mu_star);
            suite.record_odd(format!("warped lambda={lambda} N={n}"), &sol, &coeffs);
        }
        warped_ok &= (stars[0] - stars[1]).abs() <= 2.0 * t / 128.0;
        detail += &format!("; lambda={lambda}: mu* = {:.6} (N=128), {:.6} (N=256)", stars[0], stars[1]);
    }
    suite.report(4, "support theorem", Duration::from_secs(300), start, flat_ok && warped_ok, detail);
}

fn lemma_suite(suite: &mut Suite) {
    let start = Instant::now();
    let ctx = LemmaContext { t_max: 1.0, count: 100, seed: 0, quad: QuadSpec::default() };
    let registry = LemmaRegistry::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["bound0", "decay", "fubini"] {
        let s = registry.get(name).expect("registered").run(&ctx).expect("lemma run");
        pass &= s.all_pass() && s.max_rel_change < 1e-6;
        parts.push(format!(
            "{name} {}/{} worst ratio {:.3e} doubling change {:.1e}",
            s.passed, s.cases, s.worst_ratio, s.max_rel_change
        ));
    }
    suite.report(5, "lemma suite", Duration::from_secs(60), start, pass, parts.join("; "));
}

fn carleman(suite: &mut Suite) {
    let start = Instant::now();
    let coeffs = WarpedMetric::euclidean(3, 2.0).expect("metric").derive_coefficients();
    let gammas = [8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0, 128.0];
    let sweep =
        carleman_sweep(&coeffs, &[0.0, 2.0, 6.0], &gammas, &default_corpus(), &QuadSpec::default()).expect("sweep");
    let positive = sweep.per_lambda.iter().all(|l| l.c > 0.0);
    let settled = sweep.points.iter().all(|p| p.terms.rel_change < 1e-6);
    let parts: Vec<String> =
        sweep.per_lambda.iter().map(|l| format!("lambda={} gamma0={} c={:.4}", l.lambda, l.gamma0, l.c)).collect();
    let detail = format!("{}; gamma0 nondecreasing: {}", parts.join(", "), sweep.gamma0_monotone);
    suite.report(6, "Carleman estimate", Duration::from_secs(120), start, positive && settled && sweep.gamma0_monotone, detail);
}

fn edge_decay(suite: &mut Suite) {
    let start = Instant::now();
    let coeffs = WarpedMetric::new(3, &[1.0, 0.0, 1.0], 2.4).expect("metric").derive_coefficients();
    let t = 1.2;
    let grid = CharGrid::new(t, 256, None).expect("grid");
    let bump = BumpSpec::new(0.0, 1.0, 0.5, Smoothstep::Exp);
    let sol = odd_solve(&coeffs, 2.0, &grid, &bump);
    let pts: Vec<(f64, f64)> = [4.0, 8.0, 16.0].iter().map(|k| ((t / k).ln(), sol.band_max(t / k).ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    suite.record_odd("flat-step bump lambda=2".into(), &sol, &coeffs);
    let detail = format!("fitted exponent {slope:.3} on rho in {{T/4, T/8, T/16}} (limit >= 2.5)");
    suite.report(7, "edge decay", Duration::from_secs(60), start, slope.is_finite() && slope >= 2.5, detail);
}

fn antisymmetry(suite: &mut Suite) {
    let start = Instant::now();
    let mut pass = true;
    let mut worst = String::new();
    let mut worst_ratio = -1.0;
    for s in &suite.odd {
        let allowed = 10.0 * s.residual + 4.0 * f64::EPSILON * s.max_abs;
        pass &= s.defect <= allowed;
        let ratio = s.defect / allowed;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst = format!("{}: defect {:.2e} vs residual {:.2e}", s.label, s.defect, s.residual);
        }
    }
    let detail = format!("{} odd-data solves; worst {worst}", suite.odd.len());
    suite.report(8, "odd-data antisymmetry", Duration::from_secs(10), start, pass && !suite.odd.is_empty(), detail);
}

fn main() -> ExitCode {
    let mut suite = Suite::default();
    conjugation(&mut suite);
    goursat_convergence(&mut suite);
    pipeline_vs_oracle(&mut suite);
    support_theorem(&mut suite);
    lemma_suite(&mut suite);
    carleman(&mut suite);
    edge_decay(&mut suite);
    antisymmetry(&mut suite);
    if suite.failures == 0 {
        println!("acceptance: all 8 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of 8 criteria fail", suite.failures);
        ExitCode::FAILURE
    }
}
