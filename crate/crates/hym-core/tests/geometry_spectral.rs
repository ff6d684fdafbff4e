//! Spectral-calculus oracles: finite-difference derivatives, Parseval
//! quadrature, Poisson round trips, and the Laplacian's structural
//! properties on band-limited data.

use hym_core::*;
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::Arc;

fn t2(points: usize) -> Arc<TorusGeometry> {
    TorusGeometry::square(1, points, 1.0).unwrap()
}

/// 4th-order centered finite difference along a real axis of the grid.
fn fd4_axis(f: &ScalarField, axis: usize) -> Vec<Complex64> {
    let geom = f.geometry();
    let dims = geom.dims();
    let d = dims[axis];
    let h = geom.periods()[axis] / d as f64;
    let total = geom.num_points();
    let stride: usize = dims[axis + 1..].iter().product();
    let data = f.data();
    (0..total)
        .map(|p| {
            let m = (p / stride) % d;
            let idx = |by: i64| {
                let m2 = ((m as i64 + by).rem_euclid(d as i64)) as usize;
                p - m * stride + m2 * stride
            };
            (-data[idx(2)] + 8.0 * data[idx(1)] - 8.0 * data[idx(-1)] + data[idx(-2)])
                / (12.0 * h)
        })
        .collect()
}

/// ∂_i oracle: ½(Dx − i·Dy) with 4th-order centered differences.
fn fd4_holomorphic(f: &ScalarField, i: usize) -> Vec<Complex64> {
    let dx = fd4_axis(f, 2 * i);
    let dy = fd4_axis(f, 2 * i + 1);
    dx.iter()
        .zip(&dy)
        .map(|(x, y)| 0.5 * (x - Complex64::new(0.0, 1.0) * y))
        .collect()
}

#[test]
fn derivative_matches_finite_differences() {
    // bandwidth-3 data on a 64² grid: the FD truncation error dominates
    // and scales like h⁴.
    let g = t2(64);
    let f = synth::random_complex_scalar(&g, 2024, 3, 1.0);
    let spectral = f.derivative(0, Deriv::Holomorphic).unwrap();
    let oracle = fd4_holomorphic(&f, 0);
    let err = spectral
        .data()
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    // k̂⁵h⁴/30 bound with k̂ = 2π·3, h = 1/64, times a safety factor
    let khat = 2.0 * std::f64::consts::PI * 3.0;
    let bound = 10.0 * khat.powi(5) / 30.0 * (1.0f64 / 64.0).powi(4);
    assert!(err < bound, "err {err} vs bound {bound}");

    // refinement by 2 shrinks the defect ~16x
    let g2 = t2(128);
    let f2 = synth::random_complex_scalar(&g2, 2024, 3, 1.0);
    let spectral2 = f2.derivative(0, Deriv::Holomorphic).unwrap();
    let oracle2 = fd4_holomorphic(&f2, 0);
    let err2 = spectral2
        .data()
        .iter()
        .zip(&oracle2)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err2 < err / 10.0, "no h^4 decay: {err} -> {err2}");
}

#[test]
fn laplacian_integrates_to_zero() {
    let g = t2(64);
    let f = synth::random_real_scalar(&g, 55, 6, 1.3);
    let lap = f.laplacian();
    let scale = f.l2_norm();
    assert!(lap.integrate().norm() <= 1e-12 * scale.max(1.0));
}

/// Naive O(N·modes) DFT coefficient of a sampled field.
fn naive_coeff(f: &ScalarField, k: &[i64]) -> Complex64 {
    let geom = f.geometry();
    let total = geom.num_points();
    let mut acc = Complex64::default();
    for (p, v) in f.data().iter().enumerate() {
        let x = geom.coords(p);
        let mut phase = 0.0;
        for (a, &ka) in k.iter().enumerate() {
            phase += 2.0 * std::f64::consts::PI * ka as f64 * x[a] / geom.periods()[a];
        }
        acc += v * Complex64::new(0.0, -phase).exp();
    }
    acc / total as f64
}

#[test]
fn parseval_pairing() {
    // ∫ f·ḡ ω/1! = vol·Σ_k f̂_k conj(ĝ_k); coefficients from a naive DFT
    // restricted to the (known) band.
    let g = t2(32);
    let bw = 3i64;
    let f1 = synth::random_complex_scalar(&g, 1, bw as usize, 1.0);
    let f2 = synth::random_complex_scalar(&g, 2, bw as usize, 1.0);
    let quad = f1.mul(&f2.conj()).integrate();
    let mut spectral = Complex64::default();
    for kx in -bw..=bw {
        for ky in -bw..=bw {
            let k = [kx, ky];
            spectral += naive_coeff(&f1, &k) * naive_coeff(&f2, &k).conj();
        }
    }
    spectral *= g.volume();
    assert!(
        (quad - spectral).norm() <= 1e-12 * quad.norm().max(1.0),
        "quad {quad} vs parseval {spectral}"
    );
}

#[test]
fn poisson_roundtrip_on_band_limited() {
    let g = t2(64);
    let f = synth::random_real_scalar(&g, 9, 5, 0.8);
    let u = f.laplacian().poisson_solve().unwrap();
    assert!(u.sub(&f).sup_norm() < 1e-10);
    // and the other way: Δ(poisson(rhs)) = rhs for mean-zero rhs
    let rhs = synth::random_real_scalar(&g, 10, 5, 0.8);
    let v = rhs.poisson_solve().unwrap();
    assert!(v.laplacian().sub(&rhs).sup_norm() < 1e-9);
    assert!(v.mean().norm() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn laplacian_self_adjoint_and_negative(seed1 in 0u64..1000, seed2 in 0u64..1000) {
        let g = t2(16);
        let f1 = synth::random_complex_scalar(&g, seed1, 3, 1.0);
        let f2 = synth::random_complex_scalar(&g, seed2.wrapping_add(7_000), 3, 1.0);
        let lhs = f1.laplacian().mul(&f2.conj()).integrate();
        let rhs = f1.mul(&f2.laplacian().conj()).integrate();
        let scale = (f1.l2_norm() * f2.l2_norm()).max(1e-30);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);

        let mut re = f1.add(&f1.conj()).scale(0.5);
        re.enforce_real();
        let dirichlet = re.laplacian().mul(&re.conj()).integrate().re;
        prop_assert!(dirichlet <= 1e-12 * re.l2_norm().powi(2).max(1e-30));
    }

    #[test]
    fn poisson_laplacian_identity(seed in 0u64..1000) {
        let g = t2(16);
        let f = synth::random_real_scalar(&g, seed.wrapping_add(31), 4, 1.0);
        let back = f.laplacian().poisson_solve().unwrap();
        prop_assert!(back.sub(&f).sup_norm() < 1e-10);
    }
}
