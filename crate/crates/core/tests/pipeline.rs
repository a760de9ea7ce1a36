use radfield::geometry::{DerivedCoefficients, WarpedMetric};
use radfield::goursat::{build_diagonal_data, solve_mode, CharGrid, CoefficientTable, DiagonalData, ModeSolution};
use radfield::inequality::vanishing::vanishing_demo_solution;
use radfield::inequality::check_energy;
use radfield::profile::{BumpSpec, Smoothstep, ZeroProfile};

fn solve(coeffs: &DerivedCoefficients, lambda: f64, grid: &CharGrid, data: &DiagonalData) -> ModeSolution {
    let table = CoefficientTable::new(coeffs, lambda, grid).unwrap();
    solve_mode(&table, data, None).unwrap()
}

fn energy_ratio(coeffs: &DerivedCoefficients, lambda: f64, grid: &CharGrid, data: &DiagonalData) -> f64 {
    let sol = solve(coeffs, lambda, grid, data);
    check_energy(&sol, data).unwrap().ratio.expect("nonzero data")
}

#[test]
fn energy_ratio_is_stable_under_refinement() {
    let flat = WarpedMetric::euclidean(3, 2.0).unwrap().derive_coefficients();
    let warped = WarpedMetric::new(3, &[1.0, 0.0, 1.0], 1.6).unwrap().derive_coefficients();
    let bump = BumpSpec::new(0.4, 0.6, 0.1, Smoothstep::Poly4);
    let mut ratios = Vec::new();
    for n in [64usize, 128] {
        let grid = CharGrid::new(0.5, n, None).unwrap();
        let quartic = DiagonalData::from_fns(&grid, |m| m.powi(4), |m| 2.0 * m.powi(3));
        let flat_ratio = energy_ratio(&flat, 0.0, &grid, &quartic);
        let grid = CharGrid::new(0.8, n, None).unwrap();
        let odd = build_diagonal_data(&warped, &ZeroProfile, &bump, &grid).unwrap();
        let warped_ratio = energy_ratio(&warped, 2.0, &grid, &odd);
        ratios.push([flat_ratio, warped_ratio]);
    }
    for (k, (&coarse, &fine)) in ratios[0].iter().zip(&ratios[1]).enumerate() {
        assert!(coarse.is_finite() && fine.is_finite() && fine > 0.0);
        assert!(fine / coarse <= 2.0 && coarse / fine <= 2.0, "case {k}: {coarse} vs {fine}");
    }
}

#[test]
fn weighted_bound_on_the_inner_ball_shrinks_with_gamma() {
    // data supported in r >= 0.5 leaves w zero on r < T/4 = 0.4 while the
    // cutoff shell [T/4, T/2] sees it
    let coeffs = WarpedMetric::euclidean(3, 3.2).unwrap().derive_coefficients();
    let grid = CharGrid::new(1.6, 256, None).unwrap();
    let bump = BumpSpec::new(0.5, 1.0, 0.25, Smoothstep::Poly4);
    let data = build_diagonal_data(&coeffs, &ZeroProfile, &bump, &grid).unwrap();
    let sol = solve(&coeffs, 0.0, &grid, &data);
    let report = vanishing_demo_solution(&sol, &coeffs, &[4.0, 8.0, 16.0, 32.0, 64.0]).unwrap();
    assert!(report.log_bounds.iter().all(Option::is_some), "{report:?}");
    assert!(report.non_increasing, "{report:?}");
    let first = report.log_bounds[0].unwrap();
    let last = report.log_bounds[4].unwrap();
    assert!(last < first - 10.0, "{first} -> {last}");
}
