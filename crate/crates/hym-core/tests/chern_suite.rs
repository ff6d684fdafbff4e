//! Characteristic-integral checks on T⁴: genuine curvature from metrics,
//! the pointwise decomposition identities, both quantitative inequalities,
//! a finite-difference curvature oracle and scaling covariance.

use hym_core::*;
use num_complex::Complex64;
use std::sync::Arc;

fn t4() -> Arc<TorusGeometry> {
    TorusGeometry::square(2, 16, 1.0).unwrap()
}

#[test]
fn curvature_of_flat_metric_vanishes() {
    let g = t4();
    let h = MatrixField::identity(&g, 2);
    let rf = curvature_from_metric(&h).unwrap();
    for b in rf.blocks() {
        assert!(b.sup_norm() < 1e-12);
    }
}

#[test]
fn curvature_of_conformal_line_factor() {
    // h = e^{-φ}·Id: R_{ij̄αβ̄} = (∂_i∂̄_j φ)·e^{-φ}·δ_αβ
    let g = t4();
    let phi = synth::random_real_scalar(&g, 5, 1, 0.2);
    let h = MatrixField::scalar_diag(&phi.scale(-1.0).exp(), 2).hermitian_project();
    let rf = curvature_from_metric(&h).unwrap();
    let e = phi.scale(-1.0).exp();
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let dd = phi
                .derivative(i, Deriv::Holomorphic)
                .unwrap()
                .derivative(j, Deriv::AntiHolomorphic)
                .unwrap();
            let expect = MatrixField::scalar_diag(&dd.mul(&e), 2);
            worst = worst.max(rf.block(i, j).sub(&expect).sup_norm());
        }
    }
    assert!(worst < 1e-9, "conformal curvature defect {worst}");
}

#[test]
fn curvature_matches_second_order_differences() {
    // R_{ij̄} = −∂̄_j Γ_i with the outer derivative replaced by 2nd-order
    // centered differences on bandwidth-1 data; truncation is O(h²).
    let g = t4();
    let h = synth::random_positive_field(&g, 2, 23, 1, 0.25, 0.5);
    let rf = curvature_from_metric(&h).unwrap();
    let gamma = connection_form(&h).unwrap();
    let dims = g.dims();
    let r = h.rank();
    let step = |p: usize, axis: usize, by: i64| -> usize {
        let stride: usize = dims[axis + 1..].iter().product();
        let m = (p / stride) % dims[axis];
        let m2 = ((m as i64 + by).rem_euclid(dims[axis] as i64)) as usize;
        p - m * stride + m2 * stride
    };
    // compare the (i, j) = (0, 1) block: −∂̄_1 Γ_0 lowered with h
    let gam = gamma.component(0);
    let mut worst = 0.0f64;
    for p in 0..g.num_points() {
        let mut fd = vec![Complex64::default(); r * r];
        for e in 0..r * r {
            let val = |q: usize| gam.data()[q * r * r + e];
            let hx = g.periods()[2] / dims[2] as f64;
            let hy = g.periods()[3] / dims[3] as f64;
            let dx = (val(step(p, 2, 1)) - val(step(p, 2, -1))) / (2.0 * hx);
            let dy = (val(step(p, 3, 1)) - val(step(p, 3, -1))) / (2.0 * hy);
            // ∂̄ = ½(∂x + i∂y), then the minus sign of the curvature
            fd[e] = -0.5 * (dx + Complex64::new(0.0, 1.0) * dy);
        }
        let mut lowered = vec![Complex64::default(); r * r];
        linalg::matmul(r, &fd, h.block(p), &mut lowered);
        for (a, b) in lowered.iter().zip(rf.block(0, 1).block(p)) {
            worst = worst.max((a - b).norm());
        }
    }
    // 2nd-order FD at bandwidth 1 on a 16-point axis: k̂³h²/6 with slack
    let khat = 2.0 * std::f64::consts::PI;
    let bound = 10.0 * khat.powi(3) / 6.0 * (1.0f64 / 16.0).powi(2) * h.sup_norm();
    assert!(worst < bound, "err {worst} vs bound {bound}");
}

#[test]
fn genuine_curvature_identities_and_inequality() {
    let g = t4();
    for seed in [100u64, 101, 102] {
        let h = synth::random_positive_field(&g, 2, seed, 1, 0.3, 0.4);
        let rf = curvature_from_metric(&h).unwrap();
        let rep = bundle_inequality_check(&rf).unwrap();
        assert!(rep.pass, "seed {seed}: {}", rep.summary());
        assert!(
            rep.norm_identity_defect < 1e-9,
            "seed {seed}: norm identity defect {}",
            rep.norm_identity_defect
        );
        assert!(
            rep.decomposition_defect < 1e-9,
            "seed {seed}: decomposition defect {}",
            rep.decomposition_defect
        );
        assert!(
            rep.spread_identity_defect < 1e-9,
            "seed {seed}: spread identity defect {}",
            rep.spread_identity_defect
        );
    }
}

#[test]
fn rank_one_conformal_has_zero_second_chern_integrand() {
    // for any line-bundle curvature |R|² = |Ric¹|² and |Ric²|² = s², so the
    // c₂ integrand cancels identically
    let g = t4();
    let phi = synth::random_real_scalar(&g, 9, 1, 0.3);
    let h = MatrixField::scalar_diag(&phi.scale(-1.0).exp(), 1).hermitian_project();
    let rf = curvature_from_metric(&h).unwrap();
    let (_, i_c2) = bundle_chern_integrals(&rf).unwrap();
    let inv = bundle_invariants(&rf).unwrap();
    let scale = inv.r_norm_sq.sup_norm().max(1.0);
    assert!(i_c2.abs() < 1e-10 * scale, "c2 integral {i_c2}");
}

#[test]
fn bundle_scaling_covariance() {
    let g = t4();
    let h = synth::random_positive_field(&g, 2, 300, 1, 0.3, 0.4);
    let rf = curvature_from_metric(&h).unwrap();
    let rep = bundle_inequality_check(&rf).unwrap();
    let t = 1.7;
    let rep_t = bundle_inequality_check(&rf.scaled(t)).unwrap();
    let t2 = t * t;
    let tol = 1e-9 * (1.0 + rep.lhs.abs() + rep.rhs.abs()) * t2;
    assert!((rep_t.lhs - t2 * rep.lhs).abs() < tol);
    assert!((rep_t.rhs - t2 * rep.rhs).abs() < tol);
    assert!((rep_t.i_c1sq - t2 * rep.i_c1sq).abs() < tol);
    assert!((rep_t.i_c2 - t2 * rep.i_c2).abs() < tol);
    assert!((rep_t.spread_bound - t2 * rep.spread_bound).abs() < tol);
    assert!(rep_t.pass);
}

#[test]
fn kahler_random_identities() {
    let g = t4();
    for seed in [7u64, 8] {
        let rf = random_kahler_curvature(&g, seed, 1, 0.9).unwrap();
        let rep = kahler_invariants_and_check(&rf).unwrap();
        assert!(rep.pass, "seed {seed}: {}", rep.summary());
        assert!(rep.norm_identity_defect < 1e-9);
        assert!(rep.decomposition_defect < 1e-9);
        assert!(rep.spread_identity_defect < 1e-9);
    }
}

#[test]
fn kind_mismatch_is_rejected() {
    let g = t4();
    let rf = random_kahler_curvature(&g, 1, 1, 0.5).unwrap();
    assert!(bundle_invariants(&rf).is_err());
    let h = synth::random_positive_field(&g, 2, 2, 1, 0.2, 0.5);
    let bf = curvature_from_metric(&h).unwrap();
    assert!(kahler_invariants_and_check(&bf).is_err());
}
