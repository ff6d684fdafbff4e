//! Curvature operators on the model bundle E = L^⊕r over a flat torus.
//!
//! The reference metric is h₀ = h_L ⊗ Id with trace-of-curvature scalar
//! F₀ > 0, so the reference tensor is Ω₀ = F₀·Id while End(E) is globally
//! trivial and flat: the (1,0)-part of the reference connection acts on
//! matrix fields as the plain holomorphic derivative. A metric h = H·h₀
//! is described entirely by its Hermitian positive representative H, and
//! the trace of its curvature, written against h₀, is
//!
//!   Φ_H = Ω₀·H + ∂*(∂H·H⁻¹)·H,      ∂*A = −Σ_k ∂̄_k A_k.
//!
//! Re-centering at h₁ = H·h₀ linearizes this map to
//!
//!   L(Ψ) = ∂*(∂Ψ + Ψ·T − T·Ψ) + Ω₁·Ψ,   T = ∂H·H⁻¹,  Ω₁ = Φ_H·H⁻¹,
//!
//! which at H = Id reduces to −Δ_g Ψ + Ω₀·Ψ componentwise.

use crate::chern::{CurvatureField, CurvatureKind};
use crate::error::{HymError, Result};
use crate::geometry::{Deriv, ScalarField, TorusGeometry};
use crate::matrix::{MatrixField, OneFormMatrixField};
use std::sync::Arc;

/// Rank and reference curvature scalar of the model bundle.
#[derive(Clone, Debug)]
pub struct BundleData {
    r: usize,
    f0: ScalarField,
    degree: i64,
}

impl BundleData {
    /// Constant reference scalar F₀ > 0.
    pub fn constant(geom: &Arc<TorusGeometry>, r: usize, f0: f64, degree: i64) -> Result<Self> {
        Self::with_field(r, ScalarField::constant(geom, f0), degree)
    }

    /// Positive real reference scalar field.
    pub fn with_field(r: usize, f0: ScalarField, degree: i64) -> Result<Self> {
        if r == 0 || r > 8 {
            return Err(HymError::Contract(format!(
                "rank must be between 1 and 8, got {r}"
            )));
        }
        if !f0.is_real() {
            return Err(HymError::Contract("reference scalar must be real".into()));
        }
        if f0.min_real() <= 0.0 {
            return Err(HymError::Contract(format!(
                "reference scalar must be positive everywhere (min = {:.3e})",
                f0.min_real()
            )));
        }
        Ok(Self { r, f0, degree })
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn f0(&self) -> &ScalarField {
        &self.f0
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn geometry(&self) -> &Arc<TorusGeometry> {
        self.f0.geometry()
    }

    /// Ω₀ = F₀·Id, the reference tensor representative.
    pub fn omega0(&self) -> MatrixField {
        MatrixField::scalar_diag(&self.f0, self.r)
    }
}

/// Validated prescribed tensor in representative form Φ = P·h₀⁻¹.
#[derive(Clone, Debug)]
pub struct HymTarget {
    phi: MatrixField,
}

impl HymTarget {
    /// Requires a Hermitian-flagged, pointwise positive definite field.
    /// Non-positive prescriptions are rejected up front: without positivity
    /// the equation may have no solution or several (see the two-solution
    /// pipeline in the experiments module).
    pub fn new(phi: MatrixField) -> Result<Self> {
        if !phi.is_hermitian_flagged() {
            return Err(HymError::NotHermitian("prescribed tensor".into()));
        }
        let (lmin, point) = phi.min_eigenvalue()?;
        if lmin <= 0.0 {
            return Err(HymError::Contract(format!(
                "prescribed tensor must be positive definite; lambda_min = {lmin:.6e} at grid point {point} \
                 (non-positive data may admit zero or multiple solutions; see the two-solution pipeline)"
            )));
        }
        Ok(Self { phi })
    }

    /// c·Id for a positive constant c.
    pub fn constant(geom: &Arc<TorusGeometry>, r: usize, c: f64) -> Result<Self> {
        Self::new(MatrixField::identity(geom, r).scale(c))
    }

    pub fn phi(&self) -> &MatrixField {
        &self.phi
    }
}

fn require_positive_metric(h: &MatrixField) -> Result<()> {
    if !h.is_hermitian_flagged() {
        return Err(HymError::NotHermitian("metric representative".into()));
    }
    let (lmin, point) = h.min_eigenvalue()?;
    if lmin <= 0.0 {
        return Err(HymError::NotPositive {
            point,
            lambda_min: lmin,
        });
    }
    Ok(())
}

/// T_i = (∂_i H)·H⁻¹, the connection difference against the flat reference.
pub fn connection_form(h: &MatrixField) -> Result<OneFormMatrixField> {
    require_positive_metric(h)?;
    let h_inv = h.inverse()?;
    connection_form_with_inverse(h, &h_inv)
}

pub(crate) fn connection_form_with_inverse(
    h: &MatrixField,
    h_inv: &MatrixField,
) -> Result<OneFormMatrixField> {
    let n = h.geometry().n();
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        comps.push(h.derivative(i, Deriv::Holomorphic)?.mul_unchecked(h_inv));
    }
    OneFormMatrixField::new(comps)
}

/// Φ_H = Ω₀·H + ∂*(∂H·H⁻¹)·H, Hermitian-projected.
pub fn hym_endomorphism(h: &MatrixField, bundle: &BundleData) -> Result<MatrixField> {
    Ok(hym_endomorphism_raw(h, bundle)?.hermitian_project())
}

/// Same as [`hym_endomorphism`] without the final Hermitian cleanup; the
/// anti-Hermitian residue measures the aliasing level of the computation.
pub fn hym_endomorphism_raw(h: &MatrixField, bundle: &BundleData) -> Result<MatrixField> {
    check_bundle(h, bundle)?;
    require_positive_metric(h)?;
    let h_inv = h.inverse()?;
    let t = connection_form_with_inverse(h, &h_inv)?;
    let div = t.adjoint_div()?;
    // (Ω₀ + ∂*T)·H with Ω₀ = F₀·Id
    Ok(div.mul_unchecked(h).add(&h.scalar_mul(bundle.f0())))
}

fn check_bundle(h: &MatrixField, bundle: &BundleData) -> Result<()> {
    if h.rank() != bundle.rank() {
        return Err(HymError::Shape(format!(
            "metric rank {} does not match bundle rank {}",
            h.rank(),
            bundle.rank()
        )));
    }
    if !h.geometry().same_grid(bundle.geometry()) {
        return Err(HymError::Shape(
            "metric and bundle live on different grids".into(),
        ));
    }
    Ok(())
}

/// Residual field Φ_H − Φ_target with its sup and L² norms. The sup norm
/// is the pointwise Hermitian operator norm, so a constant defect c·Id
/// reports exactly |c|.
pub fn hym_residual(
    h: &MatrixField,
    target: &HymTarget,
    bundle: &BundleData,
) -> Result<(MatrixField, f64, f64)> {
    if h.rank() != target.phi().rank() || !h.geometry().same_grid(target.phi().geometry()) {
        return Err(HymError::Shape(
            "metric and target disagree in grid or rank".into(),
        ));
    }
    let endo = hym_endomorphism(h, bundle)?;
    let res = endo.sub(target.phi());
    let sup = res.sup_hermitian_norm()?;
    let l2 = res.l2_norm();
    Ok((res, sup, l2))
}

/// L(Ψ) = ∂*(∂Ψ + Ψ·T − T·Ψ) + Ω₁·Ψ, the map linearized at h₁ = H·h₀.
///
/// The caller supplies Ω₁ = Φ_H·H⁻¹ (the trace-of-curvature of h₁ against
/// itself). Ψ must be Hermitian-flagged; the solver uses the unchecked
/// variant for h₁-Hermitian directions.
pub fn linearized_apply(
    psi: &MatrixField,
    h: &MatrixField,
    omega1: &MatrixField,
) -> Result<MatrixField> {
    if !psi.is_hermitian_flagged() {
        return Err(HymError::NotHermitian("linearization direction".into()));
    }
    require_positive_metric(h)?;
    let h_inv = h.inverse()?;
    let t = connection_form_with_inverse(h, &h_inv)?;
    linearized_apply_unchecked(psi, &t, omega1)
}

pub(crate) fn linearized_apply_unchecked(
    psi: &MatrixField,
    t: &OneFormMatrixField,
    omega1: &MatrixField,
) -> Result<MatrixField> {
    let n = psi.geometry().n();
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let dpsi = psi.derivative(i, Deriv::Holomorphic)?;
        let ti = t.component(i);
        let comm = psi.mul_unchecked(ti).sub(&ti.mul_unchecked(psi));
        comps.push(dpsi.add(&comm));
    }
    let cov = OneFormMatrixField::new(comps)?;
    Ok(cov.adjoint_div()?.add(&omega1.mul_unchecked(psi)))
}

/// Chern scalar curvature s = F₀ + Δ_g φ of h = e^{-φ}h₀ together with the
/// prescribed-density representative G = e^{-φ}·s.
pub fn scalar_line_curvature(phi: &ScalarField, f0: &ScalarField) -> (ScalarField, ScalarField) {
    assert!(phi.is_real(), "conformal factor must be real");
    assert!(f0.is_real(), "reference scalar must be real");
    let s = f0.add(&phi.laplacian());
    let g = phi.scale(-1.0).exp().mul(&s);
    (s, g)
}

/// Full Chern curvature R_{ij̄αβ̄} of a metric h on T⁴ (n = 2), for the
/// characteristic-class calculators. Components are Γ_i = (∂_i h)·h⁻¹,
/// R_{ij̄} = −∂̄_j Γ_i, lowered with h; the Hermitian block symmetry
/// R_{ij̄} = R_{jī}* is enforced on output (it holds up to aliasing).
pub fn curvature_from_metric(h: &MatrixField) -> Result<CurvatureField> {
    let geom = h.geometry().clone();
    if geom.n() != 2 {
        return Err(HymError::Contract(
            "curvature_from_metric needs a T^4 geometry (n = 2)".into(),
        ));
    }
    require_positive_metric(h)?;
    let h_inv = h.inverse()?;
    let gamma = connection_form_with_inverse(h, &h_inv)?;
    let n = geom.n();
    let mut raw = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let r_up = gamma
                .component(i)
                .derivative(j, Deriv::AntiHolomorphic)?
                .scale(-1.0);
            raw.push(r_up.mul_unchecked(h));
        }
    }
    // enforce R_{ij̄} = (R_{jī})*
    let mut blocks = raw.clone();
    for i in 0..n {
        for j in 0..n {
            let sym = raw[i * n + j]
                .add(&raw[j * n + i].conj_transpose())
                .scale(0.5);
            blocks[i * n + j] = sym;
        }
    }
    CurvatureField::new(CurvatureKind::Bundle, blocks, h.clone())
}
