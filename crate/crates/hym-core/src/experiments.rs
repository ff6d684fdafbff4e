//! Two-solution and nonexistence demonstrations for the scalar equation
//! e^{-φ}(F₀ + Δ_g φ) = G on T².
//!
//! Positivity of the prescribed density G is necessary for uniqueness: this
//! module constructs, from a cusp profile f(q) = A·e^{−1/r(q)} vanishing at
//! a single grid point, a sign-changing density G admitting two distinct
//! explicit solutions. The construction matches the total masses
//!
//!   Q(t) = ∫ (Δ_g f)/(e^{f+t} − 1) ω^n  =  ∫ F₀ ω^n
//!
//! by bisection in t (Q is decreasing and → 0 for large t, while for small
//! t the cusp makes it large), then solves one Poisson problem:
//!
//!   Δ_g ψ = F₀ − Δ_g Φ/(e^{Φ} − 1),   Φ = f + t₀,
//!   G = e^{ψ}·Δ_g Φ/(e^{Φ} − 1),
//!
//! giving the two solutions φ₁ = −ψ and φ₂ = Φ − ψ. On the grid both
//! identities are exact up to the bisection mismatch, so the reported
//! residuals measure the bracket tolerance, not the cusp discretization.
//!
//! For the trivial bundle (F₀ = 0) the integral ∫ e^{-φ}|∇φ|² ω^n ≥ 0
//! obstructs solvability whenever ∫ G ω^n < 0; `nonexistence_demo` reports
//! the verdict and can optionally run the unchecked scalar solver to
//! exhibit the divergence.

use std::sync::Arc;

use crate::error::{HymError, Result};
use crate::geometry::{ScalarField, TorusGeometry};
use crate::solver::{solve_kazdan_warner_unchecked, SolveOptions, SolveReport};

/// Everything the two-solution pipeline produces.
#[derive(Clone, Debug)]
pub struct CounterexampleArtifacts {
    /// Cusp profile (after any automatic amplitude rescaling).
    pub f: ScalarField,
    /// Amplitude actually used.
    pub amplitude: f64,
    /// Matched shift parameter.
    pub t0: f64,
    /// Sampled (t, Q(t)) curve, descending in t query order.
    pub q_samples: Vec<(f64, f64)>,
    /// Φ = f + t₀ (named shift to avoid clashing with the prescription).
    pub shift: ScalarField,
    pub psi: ScalarField,
    /// The sign-changing density.
    pub g: ScalarField,
    pub phi1: ScalarField,
    pub phi2: ScalarField,
    pub residual1: f64,
    pub residual2: f64,
}

/// Pipeline configuration.
#[derive(Clone, Debug)]
pub struct CounterexampleOptions {
    /// Reference scalar F₀ > 0.
    pub f0: f64,
    /// Initial cusp amplitude A.
    pub amplitude: f64,
    /// Grid indices of the cusp point (defaults to the origin).
    pub cusp_point: [usize; 2],
    /// Bisection bracket for t.
    pub t_lo: f64,
    pub t_hi: f64,
    /// Absolute tolerance on |Q(t₀) − target|.
    pub tol_bisect: f64,
    /// Amplitude doublings attempted when the bracket fails.
    pub max_rescale: usize,
    /// Number of Q samples recorded for the diagnostic curve.
    pub q_curve_samples: usize,
}

impl Default for CounterexampleOptions {
    fn default() -> Self {
        Self {
            f0: 1.0,
            amplitude: 1.0,
            cusp_point: [0, 0],
            t_lo: 1e-3,
            t_hi: 20.0,
            tol_bisect: 1e-10,
            max_rescale: 20,
            q_curve_samples: 24,
        }
    }
}

/// Report of the integral obstruction for trivial-bundle data.
#[derive(Clone, Debug)]
pub struct NonexistenceReport {
    /// ∫ G ω^n.
    pub integral: f64,
    /// Whether the obstruction applies (integral < 0).
    pub obstructed: bool,
    pub verdict: String,
    /// Outcome of the optional unchecked solve attempt.
    pub attempt: Option<SolveReport>,
}

/// Cusp profile f(q) = A·e^{−1/r(q)} with r the torus distance to the grid
/// point p; f(p) = 0 exactly and f > 0 elsewhere.
pub fn build_cusp_profile(
    geom: &Arc<TorusGeometry>,
    p: [usize; 2],
    amplitude: f64,
) -> Result<ScalarField> {
    if geom.n() != 1 {
        return Err(HymError::Contract(
            "cusp profile is built on T^2 (n = 1)".into(),
        ));
    }
    if !(amplitude > 0.0) {
        return Err(HymError::Contract("cusp amplitude must be positive".into()));
    }
    let dims = geom.dims().to_vec();
    let periods = geom.periods().to_vec();
    if p[0] >= dims[0] || p[1] >= dims[1] {
        return Err(HymError::Contract(format!(
            "cusp point {:?} outside the grid {:?}",
            p, dims
        )));
    }
    let px = p[0] as f64 * periods[0] / dims[0] as f64;
    let py = p[1] as f64 * periods[1] / dims[1] as f64;
    let mut field = ScalarField::from_real_fn(geom, |x| {
        let mut dx = (x[0] - px).abs() % periods[0];
        if dx > periods[0] / 2.0 {
            dx = periods[0] - dx;
        }
        let mut dy = (x[1] - py).abs() % periods[1];
        if dy > periods[1] / 2.0 {
            dy = periods[1] - dy;
        }
        let r = (dx * dx + dy * dy).sqrt();
        if r == 0.0 {
            0.0
        } else {
            amplitude * (-1.0 / r).exp()
        }
    });
    field.enforce_real();
    Ok(field)
}

/// Q(t) = ∫ (Δ_g f)/(e^{f+t} − 1) ω^n for t > 0.
pub fn q_of_t(f: &ScalarField, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(HymError::Contract(format!(
            "Q(t) needs t > 0, got {t}"
        )));
    }
    let lap = f.laplacian();
    let mut integrand = ScalarField::zeros(f.geometry());
    for (o, (l, fv)) in integrand
        .data_mut()
        .iter_mut()
        .zip(lap.data().iter().zip(f.data()))
    {
        let denom = (fv.re + t).exp() - 1.0;
        *o = l / denom;
    }
    integrand.enforce_real();
    let n = f.geometry().n() as u32;
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    Ok((integrand.integrate() * factorial).re)
}

/// Runs the full two-solution construction.
pub fn counterexample_pipeline(
    geom: &Arc<TorusGeometry>,
    opts: &CounterexampleOptions,
) -> Result<CounterexampleArtifacts> {
    if !(opts.f0 > 0.0) {
        return Err(HymError::Contract("F0 must be positive".into()));
    }
    let n = geom.n() as u32;
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let target = opts.f0 * factorial * geom.volume();

    // establish the bracket, rescaling the amplitude if needed
    let mut amplitude = opts.amplitude;
    let mut f = build_cusp_profile(geom, opts.cusp_point, amplitude)?;
    let mut rescales = 0;
    loop {
        let q_lo = q_of_t(&f, opts.t_lo)?;
        let q_hi = q_of_t(&f, opts.t_hi)?;
        if q_lo > target && target > q_hi {
            break;
        }
        rescales += 1;
        if rescales > opts.max_rescale {
            let mut curve = String::new();
            for i in 0..8 {
                let t = opts.t_lo * (opts.t_hi / opts.t_lo).powf(i as f64 / 7.0);
                curve.push_str(&format!(" Q({t:.3e})={:.6e}", q_of_t(&f, t)?));
            }
            return Err(HymError::Bracket(format!(
                "no bracket for target {target:.6e} after {} amplitude doublings;{}",
                opts.max_rescale, curve
            )));
        }
        amplitude *= 2.0;
        f = build_cusp_profile(geom, opts.cusp_point, amplitude)?;
    }

    // diagnostic Q curve (log-spaced in t)
    let samples = opts.q_curve_samples.max(2);
    let mut q_samples = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = opts.t_lo * (opts.t_hi / opts.t_lo).powf(i as f64 / (samples - 1) as f64);
        q_samples.push((t, q_of_t(&f, t)?));
    }

    // bisection on the decreasing Q
    let mut lo = opts.t_lo;
    let mut hi = opts.t_hi;
    let mut t0 = 0.5 * (lo + hi);
    for _ in 0..200 {
        t0 = 0.5 * (lo + hi);
        let q = q_of_t(&f, t0)?;
        if (q - target).abs() <= opts.tol_bisect {
            break;
        }
        if q > target {
            lo = t0;
        } else {
            hi = t0;
        }
        if hi - lo < f64::EPSILON * t0 {
            break;
        }
    }
    let q0 = q_of_t(&f, t0)?;
    if (q0 - target).abs() > opts.tol_bisect * 100.0 {
        return Err(HymError::Bracket(format!(
            "bisection stalled: |Q(t0) − target| = {:.3e}",
            (q0 - target).abs()
        )));
    }

    let shift = f.add_constant(t0);
    let lap_shift = shift.laplacian();
    let mut ratio = ScalarField::zeros(geom);
    for (o, (l, sv)) in ratio
        .data_mut()
        .iter_mut()
        .zip(lap_shift.data().iter().zip(shift.data()))
    {
        *o = l / (sv.re.exp() - 1.0);
    }
    ratio.enforce_real();

    // Δψ = F0 − ΔΦ/(e^Φ − 1); the right side is mean-zero by the bisection
    let rhs = ratio.scale(-1.0).add_constant(opts.f0);
    let psi = rhs.poisson_solve_with_tol(1e-4)?;
    let g = psi.exp().mul(&ratio);

    let phi1 = psi.scale(-1.0);
    let phi2 = shift.sub(&psi);
    let f0_field = ScalarField::constant(geom, opts.f0);
    let res = |phi: &ScalarField| -> f64 {
        let (_, gg) = crate::curvature::scalar_line_curvature(phi, &f0_field);
        gg.sub(&g).sup_norm()
    };

    Ok(CounterexampleArtifacts {
        residual1: res(&phi1),
        residual2: res(&phi2),
        f,
        amplitude,
        t0,
        q_samples,
        shift,
        psi,
        g,
        phi1,
        phi2,
    })
}

/// Reports the integral obstruction for trivial-bundle prescriptions and,
/// on request, attempts the (contract-free) solve to record its failure.
pub fn nonexistence_demo(g: &ScalarField, attempt_solve: bool) -> Result<NonexistenceReport> {
    if !g.is_real() {
        return Err(HymError::Contract("density must be real".into()));
    }
    let n = g.geometry().n() as u32;
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let integral = (g.integrate() * factorial).re;
    // rounding slack so that exactly-integral-zero data stays silent
    let rounding = 1e-12 * factorial * g.sup_norm() * g.geometry().volume();
    let obstructed = integral < -rounding;
    let verdict = if obstructed {
        format!(
            "integral {integral:.6e} < 0: no solution exists on the trivial bundle \
             (any solution forces a nonnegative total density)"
        )
    } else {
        format!(
            "integral {integral:.6e} >= 0: the obstruction is silent (no claim either way)"
        )
    };
    let attempt = if attempt_solve {
        let f0 = ScalarField::constant(g.geometry(), 0.0);
        let opts = SolveOptions {
            max_newton: 12,
            continuation_steps: 1,
            ..SolveOptions::default()
        };
        Some(solve_kazdan_warner_unchecked(g, &f0, &opts)?.1)
    } else {
        None
    };
    Ok(NonexistenceReport {
        integral,
        obstructed,
        verdict,
        attempt,
    })
}
