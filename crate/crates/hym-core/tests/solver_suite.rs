//! Solver-level checks: closed forms, manufactured solutions, comparison
//! bounds, normalization and scalar/matrix consistency.

use hym_core::*;
use std::sync::Arc;

fn t2(points: usize) -> Arc<TorusGeometry> {
    TorusGeometry::square(1, points, 1.0).unwrap()
}

#[test]
fn constant_target_closed_form() {
    let g = t2(32);
    let bundle = BundleData::constant(&g, 2, 2.0, 0).unwrap();
    let target = HymTarget::constant(&g, 2, 3.0).unwrap();
    let (h, report) = solve_prescribed(&target, &bundle, &SolveOptions::default()).unwrap();
    assert!(report.converged(), "{}", report.message);
    assert_eq!(report.newton_steps, 0, "smart guess must be exact");
    let expect = MatrixField::identity(&g, 2).scale(1.5);
    assert!(h.sub(&expect).sup_norm() < 1e-9);
}

#[test]
fn manufactured_solution_recovery() {
    let g = t2(32);
    let bundle = BundleData::constant(&g, 2, 2.0, 0).unwrap();
    let (h_star, target) = synth::manufactured_solution(&bundle, 101, 2, 0.25).unwrap();
    let (h, report) = solve_prescribed(&target, &bundle, &SolveOptions::default()).unwrap();
    assert!(report.converged(), "{}", report.message);
    let err = h.sub(&h_star).sup_norm();
    assert!(err < 1e-7, "recovery error {err}");
    // every recorded iterate stayed positive
    for d in &report.diagnostics {
        assert!(d.lambda_min_h > 0.0);
    }
}

#[test]
fn uniqueness_from_two_initial_guesses() {
    let g = t2(32);
    let bundle = BundleData::constant(&g, 2, 2.0, 0).unwrap();
    let (_, target) = synth::manufactured_solution(&bundle, 77, 2, 0.2).unwrap();
    let (h_a, ra) = solve_prescribed(&target, &bundle, &SolveOptions::default()).unwrap();
    let guess = synth::random_positive_field(&g, 2, 909, 2, 0.3, 0.5);
    let opts = SolveOptions {
        initial_guess: Some(guess),
        ..SolveOptions::default()
    };
    let (h_b, rb) = solve_prescribed(&target, &bundle, &opts).unwrap();
    assert!(ra.converged() && rb.converged());
    let gap = h_a.sub(&h_b).sup_norm();
    assert!(gap < 1e-7, "solutions disagree by {gap}");
}

#[test]
fn comparison_bound_on_outputs() {
    // Φ_target ⪯ Ω₀ pointwise forces λ_max(H) ≤ 1.
    let g = t2(32);
    let f0 = 2.0;
    let bundle = BundleData::constant(&g, 2, f0, 0).unwrap();
    for seed in [5u64, 6, 7] {
        let w = synth::random_hermitian_field(&g, 2, seed, 2, 1.0);
        let wn = w.sup_hermitian_norm().unwrap();
        let phi = MatrixField::identity(&g, 2)
            .scale(0.6)
            .add_scaled(0.3 / wn, &w)
            .scale(f0);
        let target = HymTarget::new(phi.hermitian_project()).unwrap();
        let (h, report) = solve_prescribed(&target, &bundle, &SolveOptions::default()).unwrap();
        assert!(report.converged(), "{}", report.message);
        let lmax = h.max_eigenvalue().unwrap();
        assert!(lmax <= 1.0 + 1e-6, "seed {seed}: lambda_max = {lmax}");
        assert!(comparison_check(&h, 1.0).unwrap());
    }
}

#[test]
fn scaled_comparison_bound() {
    // Φ_target ⪯ 2·Ω₀ forces the scaled bound λ_max(H) ≤ 2.
    let g = t2(32);
    let f0 = 2.0;
    let bundle = BundleData::constant(&g, 2, f0, 0).unwrap();
    let w = synth::random_hermitian_field(&g, 2, 13, 2, 1.0);
    let wn = w.sup_hermitian_norm().unwrap();
    let phi = MatrixField::identity(&g, 2)
        .scale(1.4)
        .add_scaled(0.4 / wn, &w)
        .scale(f0);
    let target = HymTarget::new(phi.hermitian_project()).unwrap();
    let (h, report) = solve_prescribed(&target, &bundle, &SolveOptions::default()).unwrap();
    assert!(report.converged(), "{}", report.message);
    assert!(comparison_check(&h, 2.0).unwrap());
}

#[test]
fn normalization_flattens_minimal_eigenvalue() {
    let g = t2(32);
    // random Hermitian reference with positive total minimal eigenvalue
    let w = synth::random_hermitian_field(&g, 2, 21, 3, 0.8);
    let omega = MatrixField::identity(&g, 2).scale(2.0).add(&w);
    let (kappa0, _) = omega.eigen_range().unwrap();
    assert!(kappa0.integrate().re > 0.0);
    let (f, lambda0) = normalize_reference(&omega).unwrap();
    let shifted = omega.add(&MatrixField::scalar_diag(&f.laplacian(), 2));
    let (kappa, _) = shifted.hermitian_project().eigen_range().unwrap();
    let dev = kappa
        .data()
        .iter()
        .map(|v| (v.re - lambda0).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-8, "deviation {dev}");
}

#[test]
fn normalization_with_known_potential() {
    // Ω = (c + Δu)·Id for mean-zero u recovers f = −u and λ₀ = c.
    let g = t2(32);
    let u = synth::random_real_scalar(&g, 33, 2, 0.1);
    let c = 1.5;
    let omega = MatrixField::scalar_diag(&u.laplacian().add_constant(c), 2).hermitian_project();
    let (f, lambda0) = normalize_reference(&omega).unwrap();
    assert!((lambda0 - c).abs() < 1e-12);
    assert!(f.add(&u).sup_norm() < 1e-10);
}

#[test]
fn kazdan_warner_manufactured() {
    let g = t2(32);
    let f0 = ScalarField::constant(&g, 2.0);
    let (phi_star, dens) = synth::manufactured_conformal(&f0, 3, 3, 0.4).unwrap();
    let (phi, report) = solve_kazdan_warner(&dens, &f0, &SolveOptions::default()).unwrap();
    assert!(report.converged(), "{}", report.message);
    let err = phi.sub(&phi_star).sup_norm();
    assert!(err < 1e-9, "recovery error {err}");
}

#[test]
fn scalar_matrix_consistency_rank_one() {
    // the r = 1 matrix solve and the scalar solve agree: H = e^{-φ}
    let g = t2(32);
    let f0 = ScalarField::constant(&g, 2.0);
    let bundle = BundleData::constant(&g, 1, 2.0, 0).unwrap();
    let (_, dens) = synth::manufactured_conformal(&f0, 17, 2, 0.3).unwrap();

    let (phi, rs) = solve_kazdan_warner(&dens, &f0, &SolveOptions::default()).unwrap();
    let target = HymTarget::new(MatrixField::scalar_diag(&dens, 1).hermitian_project()).unwrap();
    let (h, rm) = solve_prescribed(&target, &bundle, &SolveOptions::default()).unwrap();
    assert!(rs.converged() && rm.converged());
    let h_scalar = MatrixField::scalar_diag(&phi.scale(-1.0).exp(), 1).hermitian_project();
    let gap = h.sub(&h_scalar).sup_norm();
    assert!(gap < 1e-8, "scalar/matrix gap {gap}");
}

#[test]
fn solver_rejects_indefinite_target_up_front() {
    let g = t2(16);
    let phi = MatrixField::constant(
        &g,
        2,
        &[
            num_complex::Complex64::new(1.0, 0.0),
            num_complex::Complex64::default(),
            num_complex::Complex64::default(),
            num_complex::Complex64::new(-0.5, 0.0),
        ],
    )
    .hermitian_project();
    assert!(HymTarget::new(phi).is_err());
}
