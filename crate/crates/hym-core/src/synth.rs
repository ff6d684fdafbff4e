//! Seeded band-limited random fields for tests, generators and the CLI.
//!
//! All generators are deterministic functions of the seed: spectral
//! coefficients are drawn in flat-index order from a ChaCha stream, so the
//! same (geometry, seed, bandwidth, amplitude) always reproduces the same
//! field bit for bit.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curvature::{hym_endomorphism, BundleData, HymTarget};
use crate::error::{HymError, Result};
use crate::geometry::{ScalarField, TorusGeometry};
use crate::matrix::MatrixField;

fn freq(dim: usize, m: usize) -> i64 {
    if m <= dim / 2 {
        m as i64
    } else {
        m as i64 - dim as i64
    }
}

/// Mean-zero complex field with spectral support |k_a| ≤ bandwidth on every
/// axis (Nyquist excluded), normalized to the requested sup-norm.
pub fn random_complex_scalar(
    geom: &Arc<TorusGeometry>,
    seed: u64,
    bandwidth: usize,
    amplitude: f64,
) -> ScalarField {
    let total = geom.num_points();
    let dims = geom.dims().to_vec();
    let mut strides = vec![0usize; dims.len()];
    let mut s = 1usize;
    for a in (0..dims.len()).rev() {
        strides[a] = s;
        s *= dims[a];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex64::default(); total];
    for (flat, c) in spec.iter_mut().enumerate() {
        let mut in_band = true;
        let mut all_zero = true;
        for a in 0..dims.len() {
            let m = (flat / strides[a]) % dims[a];
            let k = freq(dims[a], m);
            if k.unsigned_abs() as usize > bandwidth || m == dims[a] / 2 {
                in_band = false;
                break;
            }
            if k != 0 {
                all_zero = false;
            }
        }
        if in_band && !all_zero {
            *c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    geom.fft_inverse(&mut spec);
    let mut field = ScalarField::from_samples(geom, spec, false).expect("matching grid");
    let sup = field.sup_norm();
    if sup > 0.0 {
        field = field.scale(amplitude / sup);
    }
    field
}

/// Mean-zero real band-limited field (real part of a complex draw).
pub fn random_real_scalar(
    geom: &Arc<TorusGeometry>,
    seed: u64,
    bandwidth: usize,
    amplitude: f64,
) -> ScalarField {
    let z = random_complex_scalar(geom, seed, bandwidth, 1.0);
    let mut re = z.add(&z.conj()).scale(0.5);
    re.enforce_real();
    let sup = re.sup_norm();
    if sup > 0.0 {
        re = re.scale(amplitude / sup);
    }
    re
}

/// Band-limited Hermitian matrix field with sup Frobenius norm `amplitude`.
pub fn random_hermitian_field(
    geom: &Arc<TorusGeometry>,
    r: usize,
    seed: u64,
    bandwidth: usize,
    amplitude: f64,
) -> MatrixField {
    let entries: Vec<ScalarField> = (0..r * r)
        .map(|e| random_complex_scalar(geom, seed.wrapping_add(0x51ab_7e01 * (e as u64 + 1)), bandwidth, 1.0))
        .collect();
    let mut m = MatrixField::zeros(geom, r);
    for p in 0..geom.num_points() {
        let blk = m.block_mut(p);
        for (e, f) in entries.iter().enumerate() {
            blk[e] = f.data()[p];
        }
    }
    let m = m.hermitian_project();
    let sup = m.sup_norm();
    if sup > 0.0 {
        m.scale(amplitude / sup)
    } else {
        m
    }
}

/// Id + perturbation with pointwise eigenvalues guaranteed ≥ floor.
pub fn random_positive_field(
    geom: &Arc<TorusGeometry>,
    r: usize,
    seed: u64,
    bandwidth: usize,
    amplitude: f64,
    floor: f64,
) -> MatrixField {
    assert!(floor < 1.0 && floor > 0.0);
    let p = random_hermitian_field(geom, r, seed, bandwidth, 1.0);
    let worst = p.sup_hermitian_norm().expect("hermitian by construction");
    let amp = amplitude.min((1.0 - floor) / worst.max(1e-30));
    MatrixField::identity(geom, r).add_scaled(amp, &p)
}

/// Smooth positive metric representative together with the prescribed
/// tensor it solves exactly; the perturbation amplitude is halved until the
/// induced prescription is positive definite.
pub fn manufactured_solution(
    bundle: &BundleData,
    seed: u64,
    bandwidth: usize,
    amplitude: f64,
) -> Result<(MatrixField, HymTarget)> {
    let geom = bundle.geometry().clone();
    let f0_min = bundle.f0().min_real();
    let mut amp = amplitude;
    for _ in 0..24 {
        let h = random_positive_field(&geom, bundle.rank(), seed, bandwidth, amp, 0.35);
        let phi = hym_endomorphism(&h, bundle)?;
        let (lmin, _) = phi.min_eigenvalue()?;
        if lmin > 0.05 * f0_min {
            return Ok((h, HymTarget::new(phi)?));
        }
        amp *= 0.5;
    }
    Err(HymError::Contract(
        "could not manufacture a positive prescription at this amplitude".into(),
    ))
}

/// Smooth real conformal factor whose induced scalar density stays
/// positive; the amplitude is halved until e^{-φ}(F₀ + Δφ) > 0.05·min F₀.
pub fn manufactured_conformal(
    f0: &ScalarField,
    seed: u64,
    bandwidth: usize,
    amplitude: f64,
) -> Result<(ScalarField, ScalarField)> {
    let geom = f0.geometry().clone();
    let f0_min = f0.min_real();
    let mut amp = amplitude;
    for _ in 0..40 {
        let phi = random_real_scalar(&geom, seed, bandwidth, amp);
        let (_, dens) = crate::curvature::scalar_line_curvature(&phi, f0);
        if dens.min_real() > 0.05 * f0_min {
            return Ok((phi, dens));
        }
        amp *= 0.5;
    }
    Err(HymError::Contract(
        "could not manufacture a positive scalar density at this amplitude".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_band_limited() {
        let g = TorusGeometry::square(1, 16, 1.0).unwrap();
        let a = random_real_scalar(&g, 42, 2, 0.5);
        let b = random_real_scalar(&g, 42, 2, 0.5);
        assert_eq!(a.data(), b.data());
        assert!(a.is_real());
        assert!((a.sup_norm() - 0.5).abs() < 1e-12);
        assert!(a.mean().norm() < 1e-12);
        // band-limited and mean-zero: Poisson round-trips the Laplacian
        let c = random_real_scalar(&g, 7, 1, 1.0);
        let back = c.laplacian().poisson_solve().unwrap();
        assert!(back.sub(&c).sup_norm() < 1e-10);
    }

    #[test]
    fn positive_field_respects_floor() {
        let g = TorusGeometry::square(1, 8, 1.0).unwrap();
        let h = random_positive_field(&g, 3, 5, 2, 0.9, 0.4);
        let (lmin, _) = h.min_eigenvalue().unwrap();
        assert!(lmin >= 0.4 - 1e-12, "lmin = {lmin}");
    }
}
