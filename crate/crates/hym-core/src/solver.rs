//! Newton continuation solvers for the prescribed trace-of-curvature
//! equation, plus the reference normalization and comparison checks.
//!
//! The matrix solver follows a linear continuation path of prescriptions
//! Φ_t = (1−t)Ω₀ + tΦ (every Φ_t positive definite since both endpoints
//! are). At each level a damped Newton iteration updates the metric
//! representative by H ← ((Id + Ψ)·H)_herm where Ψ solves the
//! re-centered linear system
//!
//!   L(Ψ) = Φ_t·H⁻¹ − Ω₁,   L(Ψ) = ∂*(∂Ψ + ΨT − TΨ) + Ω₁·Ψ,
//!
//! with T = ∂H·H⁻¹ and Ω₁ = Φ_H·H⁻¹. The system is solved by conjugate
//! gradients after conjugation by Q = H^{1/2}: on pointwise-Hermitian
//! fields Φ the operator Φ ↦ (Q⁻¹·L(QΦQ⁻¹)·Q)_herm is self-adjoint
//! positive for the flat pairing (it inherits the coercivity bound
//! (LΨ, Ψ) ≥ min λ(Ω₁)·(Ψ, Ψ)), and the spectral inverse of −Δ_g + c with
//! c = mean λ_min(Ω₁) differs from it by a bounded multiplication, which
//! makes it an effective preconditioner. Backtracking keeps every iterate
//! positive definite and the residual decreasing; when a Newton direction
//! stalls, one frozen-operator step (the preconditioner applied to the
//! residual) is tried before giving up.
//!
//! The scalar solver treats e^{-φ}(F₀ + Δ_g φ) = G with G > 0 along the
//! path G_t = (1−t)F₀ + tG, linearized as e^{-φ}Δψ − Gψ = −residual and
//! symmetrized to the positive system (−Δ + e^{φ}G_t)ψ = e^{φ}·residual.

use num_complex::Complex64;

use crate::curvature::{
    connection_form_with_inverse, linearized_apply_unchecked, BundleData, HymTarget,
};
use crate::error::{HymError, Result};
use crate::geometry::ScalarField;
use crate::matrix::{MatrixField, OneFormMatrixField, POSITIVITY_FLOOR};

/// Slack used by [`comparison_check`].
pub const COMPARISON_TOL: f64 = 1e-6;

/// Solver configuration.
#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Relative sup-norm residual tolerance.
    pub tol_residual: f64,
    /// Newton iteration cap per continuation level.
    pub max_newton: usize,
    /// Number of uniform continuation steps.
    pub continuation_steps: usize,
    /// Smallest admissible damping factor (backtracking halves from 1).
    pub damping_min: f64,
    /// Cap for the inexact-Newton forcing term η_k = min(cap, √residual).
    pub forcing_max: f64,
    /// Inner linear-solve iteration cap.
    pub linear_max_iter: usize,
    /// Initial guess for the matrix solver (defaults to the constant-field
    /// closed form built from the target and reference means).
    pub initial_guess: Option<MatrixField>,
    /// Initial guess for the scalar solver.
    pub initial_phi: Option<ScalarField>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_residual: 1e-9,
            max_newton: 50,
            continuation_steps: 8,
            damping_min: 2f64.powi(-12),
            forcing_max: 0.1,
            linear_max_iter: 500,
            initial_guess: None,
            initial_phi: None,
        }
    }
}

/// Terminal state of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    Obstruction,
    MaxIter,
    PositivityBreakdown,
}

/// Monitored quantities per accepted Newton iterate.
#[derive(Clone, Debug)]
pub struct IterateDiagnostics {
    /// Continuation parameter of the level this iterate belongs to.
    pub t: f64,
    pub residual_sup: f64,
    pub residual_l2: f64,
    /// sup tr_E H.
    pub sup_tr_h: f64,
    /// sup |∂H·H⁻¹|²_h.
    pub sup_t_norm_sq: f64,
    pub lambda_min_h: f64,
    pub lambda_max_h: f64,
}

/// Residual history and diagnostics of one solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub residual_history: Vec<f64>,
    pub diagnostics: Vec<IterateDiagnostics>,
    pub newton_steps: usize,
    /// Total inner linear-solve iterations.
    pub linear_iterations: usize,
    pub message: String,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

struct CgOutcome {
    iterations: usize,
    breakdown: bool,
}

fn inner(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x * y.conj()).re).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    inner(a, a).max(0.0).sqrt()
}

/// Preconditioned conjugate gradients on raw coefficient buffers.
fn pcg(
    mut apply_a: impl FnMut(&[Complex64]) -> Vec<Complex64>,
    mut apply_m: impl FnMut(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    rel_tol: f64,
    max_iter: usize,
) -> (Vec<Complex64>, CgOutcome) {
    let nb = norm(b);
    let mut x = vec![Complex64::default(); b.len()];
    if nb == 0.0 {
        return (
            x,
            CgOutcome {
                iterations: 0,
                breakdown: false,
            },
        );
    }
    let mut r = b.to_vec();
    let mut z = apply_m(&r);
    let mut p = z.clone();
    let mut rz = inner(&r, &z);
    for it in 0..max_iter {
        let ap = apply_a(&p);
        let pap = inner(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return (
                x,
                CgOutcome {
                    iterations: it,
                    breakdown: true,
                },
            );
        }
        let alpha = rz / pap;
        for ((xi, pi), (ri, api)) in x.iter_mut().zip(&p).zip(r.iter_mut().zip(&ap)) {
            *xi += alpha * pi;
            *ri -= alpha * api;
        }
        let rel = norm(&r) / nb;
        if rel <= rel_tol {
            return (
                x,
                CgOutcome {
                    iterations: it + 1,
                    breakdown: false,
                },
            );
        }
        z = apply_m(&r);
        let rz_new = inner(&r, &z);
        let beta = rz_new / rz;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        rz = rz_new;
    }
    (
        x,
        CgOutcome {
            iterations: max_iter,
            breakdown: false,
        },
    )
}

/// Everything the Newton step needs about the current iterate.
struct MetricState {
    h_inv: MatrixField,
    t: OneFormMatrixField,
    omega1: MatrixField,
    endo: MatrixField,
}

fn metric_state(h: &MatrixField, bundle: &BundleData) -> Result<MetricState> {
    let (lmin, point) = h.min_eigenvalue()?;
    if lmin <= POSITIVITY_FLOOR {
        return Err(HymError::NotPositive {
            point,
            lambda_min: lmin,
        });
    }
    let h_inv = h.inverse()?;
    let t = connection_form_with_inverse(h, &h_inv)?;
    let omega1 = t.adjoint_div()?.add(&bundle.omega0());
    let endo = omega1.mul_unchecked(h).hermitian_project();
    Ok(MetricState {
        h_inv,
        t,
        omega1,
        endo,
    })
}

fn residual_sup(endo: &MatrixField, phi_t: &MatrixField) -> Result<(MatrixField, f64, f64)> {
    let res = endo.sub(phi_t);
    let sup = res.sup_hermitian_norm()?;
    let l2 = res.l2_norm();
    Ok((res, sup, l2))
}

fn diagnostics_for(
    h: &MatrixField,
    state: &MetricState,
    t: f64,
    sup: f64,
    l2: f64,
) -> Result<IterateDiagnostics> {
    let (lmin, lmax) = h.eigen_range()?;
    let tr = h.trace();
    let t_sq = state.t.norm_sq_weighted(h, &state.h_inv)?;
    Ok(IterateDiagnostics {
        t,
        residual_sup: sup,
        residual_l2: l2,
        sup_tr_h: tr.max_real(),
        sup_t_norm_sq: t_sq.max_real(),
        lambda_min_h: lmin.min_real(),
        lambda_max_h: lmax.max_real(),
    })
}

/// Solves Φ_H = Φ_target for the Hermitian positive representative H.
///
/// Contract violations (non-positive target, grid/rank mismatch) are
/// errors; non-convergence is reported in the returned `SolveReport`
/// together with the best iterate found.
pub fn solve_prescribed(
    target: &HymTarget,
    bundle: &BundleData,
    opts: &SolveOptions,
) -> Result<(MatrixField, SolveReport)> {
    let geom = bundle.geometry().clone();
    let phi = target.phi();
    if phi.rank() != bundle.rank() || !phi.geometry().same_grid(&geom) {
        return Err(HymError::Shape(
            "target and bundle disagree in grid or rank".into(),
        ));
    }
    let omega0 = bundle.omega0();
    let target_scale = phi.sup_hermitian_norm()?;

    let mut h = match &opts.initial_guess {
        Some(g) => {
            if !g.is_hermitian_flagged() || g.rank() != bundle.rank() {
                return Err(HymError::Contract(
                    "initial guess must be a Hermitian field of the bundle rank".into(),
                ));
            }
            g.clone()
        }
        None => {
            // constant-field closed form: H = mean(tr Φ)/(r·mean F₀)·Id
            let c = phi.trace().mean().re / (bundle.rank() as f64 * bundle.f0().mean().re);
            MatrixField::identity(&geom, bundle.rank()).scale(c.max(POSITIVITY_FLOOR * 10.0))
        }
    };

    let mut report = SolveReport {
        status: SolveStatus::Converged,
        residual_history: Vec::new(),
        diagnostics: Vec::new(),
        newton_steps: 0,
        linear_iterations: 0,
        message: String::new(),
    };

    // fast path: the initial guess may already solve the full problem
    {
        let state = metric_state(&h, bundle)?;
        let (_, sup, l2) = residual_sup(&state.endo, phi)?;
        report.residual_history.push(sup);
        report
            .diagnostics
            .push(diagnostics_for(&h, &state, 1.0, sup, l2)?);
        if sup <= opts.tol_residual * target_scale {
            report.message = "initial guess satisfies the prescription".into();
            return Ok((h, report));
        }
    }

    let steps = opts.continuation_steps.max(1);
    'levels: for step in 1..=steps {
        let t = step as f64 / steps as f64;
        let phi_t = omega0.scale(1.0 - t).add(&phi.scale(t));
        let scale_t = phi_t.sup_hermitian_norm()?.max(f64::MIN_POSITIVE);
        // intermediate levels only need to stay inside the Newton basin of
        // the next one; the final level is solved to the requested tolerance
        let level_tol = if step == steps {
            opts.tol_residual
        } else {
            opts.tol_residual.max(1e-6)
        };

        for _ in 0..opts.max_newton {
            let state = match metric_state(&h, bundle) {
                Ok(s) => s,
                Err(HymError::NotPositive { point, lambda_min }) => {
                    report.status = SolveStatus::PositivityBreakdown;
                    report.message = format!(
                        "iterate lost positivity at point {point} (lambda_min = {lambda_min:.3e})"
                    );
                    break 'levels;
                }
                Err(e) => return Err(e),
            };
            let (_, sup, l2) = residual_sup(&state.endo, &phi_t)?;
            report.residual_history.push(sup);
            report
                .diagnostics
                .push(diagnostics_for(&h, &state, t, sup, l2)?);
            let rel = sup / scale_t;
            if rel <= level_tol {
                continue 'levels;
            }

            let (psi, lin_iters) = newton_direction(&h, &state, &phi_t, rel, opts)?;
            report.linear_iterations += lin_iters;
            match line_search(&h, bundle, &phi_t, &psi, sup, opts)? {
                Some((h_new, _)) => {
                    h = h_new;
                    report.newton_steps += 1;
                }
                None => {
                    // frozen-operator fallback: precondition the residual
                    let psi_picard = picard_direction(&state, &phi_t, bundle)?;
                    match line_search(&h, bundle, &phi_t, &psi_picard, sup, opts)? {
                        Some((h_new, _)) => {
                            h = h_new;
                            report.newton_steps += 1;
                        }
                        None => {
                            report.status = SolveStatus::PositivityBreakdown;
                            report.message = format!(
                                "damping floor reached at continuation level t = {t}"
                            );
                            break 'levels;
                        }
                    }
                }
            }
        }

        // Newton budget exhausted for this level?
        let state = metric_state(&h, bundle)?;
        let (_, sup, _) = residual_sup(&state.endo, &phi_t)?;
        if sup / scale_t > level_tol {
            report.status = SolveStatus::MaxIter;
            report.message = format!(
                "Newton budget exhausted at level t = {t} (residual {sup:.3e})"
            );
            break 'levels;
        }
    }

    // final residual against the requested target
    let state = metric_state(&h, bundle)?;
    let (_, sup, l2) = residual_sup(&state.endo, phi)?;
    report.residual_history.push(sup);
    report
        .diagnostics
        .push(diagnostics_for(&h, &state, 1.0, sup, l2)?);
    if report.status == SolveStatus::Converged && sup > opts.tol_residual * target_scale {
        report.status = SolveStatus::MaxIter;
        report.message = format!("final residual {sup:.3e} above tolerance");
    }
    Ok((h, report))
}

/// One inexact Newton direction Ψ (h₁-Hermitian), solved by conjugated CG.
fn newton_direction(
    h: &MatrixField,
    state: &MetricState,
    phi_t: &MatrixField,
    rel_residual: f64,
    opts: &SolveOptions,
) -> Result<(MatrixField, usize)> {
    let geom = h.geometry().clone();
    let r = h.rank();
    let q = h.sqrt()?;
    let q_inv = q.inverse()?;

    let rhs_h1 = phi_t.product(&state.h_inv)?.sub(&state.omega1);
    let rhs_flat = q_inv
        .mul_unchecked(&rhs_h1)
        .mul_unchecked(&q)
        .hermitian_project();

    let (kappa, _) = state.omega1.hermitian_project().eigen_range()?;
    let c = kappa.mean().re.max(1e-8);
    let lap = geom.laplace_symbol();
    let precond_table: Vec<f64> = lap.iter().map(|l| 1.0 / (c - l)).collect();

    let eta = opts.forcing_max.min(rel_residual.sqrt()).max(1e-12);
    let t_form = &state.t;
    let omega1 = &state.omega1;
    let apply_a = |raw: &[Complex64]| -> Vec<Complex64> {
        let mut flat = MatrixField::from_samples(&geom, r, raw.to_vec()).expect("shape");
        flat.set_hermitian_flag(true);
        let psi = q.mul_unchecked(&flat).mul_unchecked(&q_inv);
        let l = linearized_apply_unchecked(&psi, t_form, omega1).expect("operator apply");
        q_inv
            .mul_unchecked(&l)
            .mul_unchecked(&q)
            .hermitian_project()
            .data()
            .to_vec()
    };
    let apply_m = |raw: &[Complex64]| -> Vec<Complex64> {
        let mut f = MatrixField::from_samples(&geom, r, raw.to_vec()).expect("shape");
        f.set_hermitian_flag(true);
        f.apply_real_symbol(&precond_table).data().to_vec()
    };

    let (sol, outcome) = pcg(
        apply_a,
        apply_m,
        rhs_flat.data(),
        eta,
        opts.linear_max_iter,
    );
    let mut flat = MatrixField::from_samples(&geom, r, sol)?;
    flat.set_hermitian_flag(true);
    Ok((q.mul_unchecked(&flat).mul_unchecked(&q_inv), outcome.iterations))
}

/// Frozen-operator direction: spectral (−Δ + mean F₀)⁻¹ of the residual.
fn picard_direction(
    state: &MetricState,
    phi_t: &MatrixField,
    bundle: &BundleData,
) -> Result<MatrixField> {
    let rhs = phi_t.product(&state.h_inv)?.sub(&state.omega1);
    let c = bundle.f0().mean().re.max(1e-8);
    let lap = bundle.geometry().laplace_symbol();
    let table: Vec<f64> = lap.iter().map(|l| 1.0 / (c - l)).collect();
    Ok(rhs.apply_real_symbol(&table))
}

/// Backtracking on H ← ((Id + αΨ)·H)_herm: keeps positivity and demands a
/// residual decrease. Returns the accepted iterate or None on stall.
fn line_search(
    h: &MatrixField,
    bundle: &BundleData,
    phi_t: &MatrixField,
    psi: &MatrixField,
    current_sup: f64,
    opts: &SolveOptions,
) -> Result<Option<(MatrixField, f64)>> {
    let id = MatrixField::identity(h.geometry(), h.rank());
    let mut alpha = 1.0;
    while alpha >= opts.damping_min {
        let trial = id
            .add_scaled(alpha, psi)
            .mul_unchecked(h)
            .hermitian_project();
        let (lmin, _) = trial.min_eigenvalue()?;
        if lmin > POSITIVITY_FLOOR {
            if let Ok(state) = metric_state(&trial, bundle) {
                let (_, sup, _) = residual_sup(&state.endo, phi_t)?;
                if sup.is_finite() && sup < current_sup {
                    return Ok(Some((trial, sup)));
                }
            }
        }
        alpha *= 0.5;
    }
    Ok(None)
}

/// Scalar prescribed-curvature solver: finds real φ with
/// e^{-φ}(F₀ + Δ_g φ) = G for positive data G.
pub fn solve_kazdan_warner(
    g: &ScalarField,
    f0: &ScalarField,
    opts: &SolveOptions,
) -> Result<(ScalarField, SolveReport)> {
    if !g.is_real() || !f0.is_real() {
        return Err(HymError::Contract(
            "scalar solver needs real data fields".into(),
        ));
    }
    if g.min_real() <= 0.0 {
        return Err(HymError::Contract(format!(
            "prescribed density must be positive everywhere (min = {:.3e}); \
             non-positive data may admit zero or multiple solutions",
            g.min_real()
        )));
    }
    if f0.min_real() <= 0.0 {
        return Err(HymError::Contract(
            "reference scalar must be positive".into(),
        ));
    }
    solve_kazdan_warner_unchecked(g, f0, opts)
}

/// Same iteration without the positivity contract; used by the
/// nonexistence demonstration to exhibit divergence on bad data.
pub fn solve_kazdan_warner_unchecked(
    g: &ScalarField,
    f0: &ScalarField,
    opts: &SolveOptions,
) -> Result<(ScalarField, SolveReport)> {
    let geom = g.geometry().clone();
    if !geom.same_grid(f0.geometry()) {
        return Err(HymError::Shape("data fields on different grids".into()));
    }
    let scale = g.sup_norm().max(f64::MIN_POSITIVE);
    let mut phi = match &opts.initial_phi {
        Some(p) => p.clone(),
        None => {
            let ratio = f0.mean().re / g.mean().re;
            let c = if ratio > 0.0 { ratio.ln() } else { 0.0 };
            ScalarField::constant(&geom, c)
        }
    };

    let mut report = SolveReport {
        status: SolveStatus::Converged,
        residual_history: Vec::new(),
        diagnostics: Vec::new(),
        newton_steps: 0,
        linear_iterations: 0,
        message: String::new(),
    };

    let lap_sym = geom.laplace_symbol();
    let kw_residual = |phi: &ScalarField, g_t: &ScalarField| -> (ScalarField, f64) {
        let s = f0.add(&phi.laplacian());
        let res = phi.scale(-1.0).exp().mul(&s).sub(g_t);
        let sup = res.sup_norm();
        (res, sup)
    };
    let kw_diag = |phi: &ScalarField, t: f64, sup: f64, res: &ScalarField| -> IterateDiagnostics {
        let e = phi.scale(-1.0).exp();
        let tsq = phi.grad_norm_sq().map(|f| f.max_real()).unwrap_or(f64::NAN);
        IterateDiagnostics {
            t,
            residual_sup: sup,
            residual_l2: res.l2_norm(),
            sup_tr_h: e.max_real(),
            sup_t_norm_sq: tsq,
            lambda_min_h: e.min_real(),
            lambda_max_h: e.max_real(),
        }
    };

    // fast path
    {
        let (res, sup) = kw_residual(&phi, g);
        report.residual_history.push(sup);
        report.diagnostics.push(kw_diag(&phi, 1.0, sup, &res));
        if sup <= opts.tol_residual * scale {
            return Ok((phi, report));
        }
    }

    let steps = opts.continuation_steps.max(1);
    'levels: for step in 1..=steps {
        let t = step as f64 / steps as f64;
        let g_t = f0.scale(1.0 - t).add(&g.scale(t));
        let scale_t = g_t.sup_norm().max(f64::MIN_POSITIVE);
        let level_tol = if step == steps {
            opts.tol_residual
        } else {
            opts.tol_residual.max(1e-6)
        };

        for _ in 0..opts.max_newton {
            let (res, sup) = kw_residual(&phi, &g_t);
            report.residual_history.push(sup);
            report.diagnostics.push(kw_diag(&phi, t, sup, &res));
            if !sup.is_finite() {
                report.status = SolveStatus::PositivityBreakdown;
                report.message = "iterate blow-up (non-finite residual)".into();
                break 'levels;
            }
            if sup <= level_tol * scale_t {
                continue 'levels;
            }

            // (−Δ + e^{φ}G_t) ψ = e^{φ}·residual
            let weight = phi.exp().mul(&g_t);
            let rhs = phi.exp().mul(&res);
            let c = weight.mean().re.max(1e-8);
            let precond_table: Vec<f64> = lap_sym.iter().map(|l| 1.0 / (c - l)).collect();
            let apply_a = |raw: &[Complex64]| -> Vec<Complex64> {
                let f = ScalarField::from_samples(&geom, raw.to_vec(), false).expect("shape");
                let out = f.laplacian().scale(-1.0).add(&weight.mul(&f));
                out.data().to_vec()
            };
            let apply_m = |raw: &[Complex64]| -> Vec<Complex64> {
                let mut data = raw.to_vec();
                geom.apply_real_symbol(&mut data, &precond_table);
                data
            };
            let eta = opts.forcing_max.min((sup / scale_t).sqrt()).max(1e-12);
            let (sol, outcome) = pcg(apply_a, apply_m, rhs.data(), eta, opts.linear_max_iter);
            report.linear_iterations += outcome.iterations;
            let mut psi = ScalarField::from_samples(&geom, sol, false)?;
            psi.enforce_real();

            let mut accepted = false;
            let mut alpha = 1.0;
            while alpha >= opts.damping_min {
                let trial = phi.add(&psi.scale(alpha));
                let (_, trial_sup) = kw_residual(&trial, &g_t);
                if trial_sup.is_finite() && trial_sup < sup {
                    phi = trial;
                    report.newton_steps += 1;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                report.status = if outcome.breakdown {
                    SolveStatus::Obstruction
                } else {
                    SolveStatus::MaxIter
                };
                report.message = if outcome.breakdown {
                    "linearization is not positive definite (indefinite data); residual floor reached".into()
                } else {
                    format!("damping floor reached at level t = {t} (residual {sup:.3e})")
                };
                break 'levels;
            }
        }

        let (_, sup) = kw_residual(&phi, &g_t);
        if sup / scale_t > level_tol {
            if report.status == SolveStatus::Converged {
                report.status = SolveStatus::MaxIter;
                report.message = format!("Newton budget exhausted at level t = {t}");
            }
            break 'levels;
        }
    }

    let (res, sup) = kw_residual(&phi, g);
    report.residual_history.push(sup);
    report.diagnostics.push(kw_diag(&phi, 1.0, sup, &res));
    if report.status == SolveStatus::Converged && sup > opts.tol_residual * scale {
        report.status = SolveStatus::MaxIter;
        report.message = format!("final residual {sup:.3e} above tolerance");
    }
    Ok((phi, report))
}

/// Conformal normalization of a reference tensor whose minimal-eigenvalue
/// function κ has positive total integral: returns the mean-zero potential
/// f with κ + Δ_g f = λ₀ and the constant λ₀ = mean κ. The shifted tensor
/// Ω + (Δ_g f)·Id then has constant minimal eigenvalue λ₀.
pub fn normalize_reference(omega: &MatrixField) -> Result<(ScalarField, f64)> {
    let (kappa, _) = omega.eigen_range()?;
    let total = kappa.integrate().re;
    if total <= 0.0 {
        return Err(HymError::Obstruction(format!(
            "total minimal eigenvalue is not positive (integral = {total:.6e})"
        )));
    }
    let lambda0 = total / omega.geometry().volume();
    let rhs = kappa.scale(-1.0).add_constant(lambda0);
    let f = rhs.poisson_solve()?;
    Ok((f, lambda0))
}

/// True iff sup λ_max(H) ≤ λ + COMPARISON_TOL.
pub fn comparison_check(h: &MatrixField, lambda: f64) -> Result<bool> {
    let lmax = h.max_eigenvalue()?;
    Ok(lmax <= lambda + COMPARISON_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TorusGeometry;

    #[test]
    fn comparison_check_constants() {
        let g = TorusGeometry::square(1, 8, 1.0).unwrap();
        let id = MatrixField::identity(&g, 2);
        assert!(comparison_check(&id, 1.0).unwrap());
        assert!(!comparison_check(&id.scale(2.0), 1.0).unwrap());
    }

    #[test]
    fn normalize_constant_reference() {
        let g = TorusGeometry::square(1, 16, 1.0).unwrap();
        let omega = MatrixField::identity(&g, 2).scale(3.0);
        let (f, lambda0) = normalize_reference(&omega).unwrap();
        assert!((lambda0 - 3.0).abs() < 1e-12);
        assert!(f.sup_norm() < 1e-12);
    }

    #[test]
    fn normalize_rejects_nonpositive_total() {
        let g = TorusGeometry::square(1, 8, 1.0).unwrap();
        let omega = MatrixField::identity(&g, 2).scale(-1.0);
        assert!(matches!(
            normalize_reference(&omega),
            Err(HymError::Obstruction(_))
        ));
    }

    #[test]
    fn kazdan_warner_constant_closed_form() {
        let g = TorusGeometry::square(1, 16, 1.0).unwrap();
        let f0 = ScalarField::constant(&g, 2.0);
        let dens = ScalarField::constant(&g, 3.0);
        let (phi, report) = solve_kazdan_warner(&dens, &f0, &SolveOptions::default()).unwrap();
        assert!(report.converged());
        let expect = (2.0f64 / 3.0).ln();
        assert!((phi.max_real() - expect).abs() < 1e-12);
        assert!((phi.min_real() - expect).abs() < 1e-12);
    }

    #[test]
    fn kazdan_warner_rejects_sign_changing_data() {
        let g = TorusGeometry::square(1, 8, 1.0).unwrap();
        let f0 = ScalarField::constant(&g, 1.0);
        let dens = ScalarField::constant(&g, -0.2);
        assert!(solve_kazdan_warner(&dens, &f0, &SolveOptions::default()).is_err());
    }
}
