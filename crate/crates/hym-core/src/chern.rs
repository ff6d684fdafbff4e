//! Chern-Weil integrals and quantitative Chern number inequalities on T⁴.
//!
//! Works with sampled curvature tensors on a torus of complex dimension
//! n = 2, in two flavors:
//!
//! - bundle: R_{ij̄αβ̄} together with the fiber metric h used for raising
//!   indices; Ric¹_{ij̄} = h^{αβ̄}R_{ij̄αβ̄}, Ric²_{αβ̄} = Σ_k R_{kk̄αβ̄},
//!   s = Σ_k Ric¹_{kk̄};
//! - Kähler: R_{ij̄kl̄} with the pair symmetries R_{ij̄kl̄} = R_{kj̄il̄} =
//!   R_{il̄kj̄}; contractions use the flat g = δ.
//!
//! Characteristic integrals are evaluated through the scalar reductions of
//! the c₁²- and c₂-integrands (never by assembling forms):
//!
//!   ∫ c₁²(E)∧ω^{n−2} = 1/(4π²n(n−1)) ∫ (s² − |Ric¹|²) ω^n,
//!   ∫ c₂(E)∧ω^{n−2} = 1/(8π²n(n−1)) ∫ (s² − |Ric¹|² − |Ric²|² + |R|²) ω^n,
//!
//! and the quantitative inequalities compare the ((r−1)c₁² − 2r c₂) or
//! (n c₁² − 2(n+1) c₂) combinations against the measured eigenvalue spread
//! of the trace-of-curvature endomorphism. The pointwise traceless-part
//! identities behind them hold as exact algebra and are re-verified on
//! every input; their defects fail loudly under any wrong contraction
//! convention.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{HymError, Result};
use crate::geometry::{ScalarField, TorusGeometry};
use crate::linalg;
use crate::matrix::MatrixField;
use crate::synth;

/// Which curvature tensor a [`CurvatureField`] stores.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvatureKind {
    Bundle,
    Kahler,
}

/// Relative tolerance for the Hermitian/Kähler symmetry validation.
const SYMMETRY_TOL: f64 = 1e-12;

/// Sampled curvature tensor on T⁴: n² blocks indexed by the form pair
/// (i, j̄), each an r×r matrix field in the fiber indices (r = n and h = Id
/// for the Kähler case).
#[derive(Clone, Debug)]
pub struct CurvatureField {
    kind: CurvatureKind,
    blocks: Vec<MatrixField>,
    h: MatrixField,
}

impl CurvatureField {
    /// Validates symmetries and (bundle case) positivity of h.
    /// Symmetry-violating data is rejected, never silently evaluated.
    pub fn new(kind: CurvatureKind, blocks: Vec<MatrixField>, h: MatrixField) -> Result<Self> {
        let geom = h.geometry().clone();
        let n = geom.n();
        if n != 2 {
            return Err(HymError::Contract(
                "curvature calculators need a T^4 geometry (n = 2)".into(),
            ));
        }
        if blocks.len() != n * n {
            return Err(HymError::Shape(format!(
                "expected {} curvature blocks, got {}",
                n * n,
                blocks.len()
            )));
        }
        let r = blocks[0].rank();
        for b in &blocks {
            if !b.geometry().same_grid(&geom) || b.rank() != r {
                return Err(HymError::Shape(
                    "curvature blocks disagree in grid or rank".into(),
                ));
            }
        }
        if h.rank() != r {
            return Err(HymError::Shape(
                "fiber metric rank does not match curvature blocks".into(),
            ));
        }
        match kind {
            CurvatureKind::Bundle => {
                if !h.is_hermitian_flagged() {
                    return Err(HymError::NotHermitian("fiber metric".into()));
                }
                let (lmin, point) = h.min_eigenvalue()?;
                if lmin <= 0.0 {
                    return Err(HymError::NotPositive {
                        point,
                        lambda_min: lmin,
                    });
                }
            }
            CurvatureKind::Kahler => {
                if r != n {
                    return Err(HymError::Shape(format!(
                        "Kähler curvature blocks must be {n}x{n}, got rank {r}"
                    )));
                }
            }
        }
        let field = Self { kind, blocks, h };
        let scale = field.scale().max(f64::MIN_POSITIVE);
        let defect = field.hermitian_symmetry_defect();
        if defect > SYMMETRY_TOL * scale {
            return Err(HymError::Contract(format!(
                "curvature violates the Hermitian symmetry R_ij = R_ji^*: defect {defect:.3e} vs scale {scale:.3e}"
            )));
        }
        if kind == CurvatureKind::Kahler {
            let d = field.kahler_symmetry_defect();
            if d > SYMMETRY_TOL * scale {
                return Err(HymError::Contract(format!(
                    "curvature violates the Kähler pair symmetries: defect {d:.3e} vs scale {scale:.3e}"
                )));
            }
        }
        Ok(field)
    }

    pub fn kind(&self) -> CurvatureKind {
        self.kind
    }

    pub fn geometry(&self) -> &Arc<TorusGeometry> {
        self.h.geometry()
    }

    /// Dimension of the form indices (always 2 here).
    pub fn n(&self) -> usize {
        self.geometry().n()
    }

    /// Fiber rank of the blocks.
    pub fn rank(&self) -> usize {
        self.blocks[0].rank()
    }

    pub fn block(&self, i: usize, j: usize) -> &MatrixField {
        &self.blocks[i * self.n() + j]
    }

    pub fn blocks(&self) -> &[MatrixField] {
        &self.blocks
    }

    pub fn fiber_metric(&self) -> &MatrixField {
        &self.h
    }

    /// Rescales the curvature tensor by t (the fiber metric is untouched).
    pub fn scaled(&self, t: f64) -> CurvatureField {
        CurvatureField {
            kind: self.kind,
            blocks: self.blocks.iter().map(|b| b.scale(t)).collect(),
            h: self.h.clone(),
        }
    }

    fn scale(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.sup_norm())
            .fold(0.0, f64::max)
    }

    fn hermitian_symmetry_defect(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = self
                    .block(i, j)
                    .sub(&self.block(j, i).conj_transpose())
                    .sup_norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    fn kahler_symmetry_defect(&self) -> f64 {
        let n = self.n();
        let r = self.rank();
        let total = self.geometry().num_points();
        let at = |i: usize, j: usize, k: usize, l: usize, p: usize| -> Complex64 {
            self.block(i, j).block(p)[k * r + l]
        };
        let mut worst = 0.0f64;
        for p in 0..total {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let v = at(i, j, k, l, p);
                            worst = worst.max((v - at(k, j, i, l, p)).norm());
                            worst = worst.max((v - at(i, l, k, j, p)).norm());
                        }
                    }
                }
            }
        }
        worst
    }
}

/// Pointwise traces, norms and the traceless part of a bundle curvature.
pub struct BundleInvariants {
    /// Ric¹_{ij̄} as an n×n matrix field.
    pub ric1: MatrixField,
    /// Ric²_{αβ̄} as an r×r matrix field.
    pub ric2: MatrixField,
    /// Chern scalar curvature s.
    pub s: ScalarField,
    /// |R|²_{g,h}, fully contracted with g and h.
    pub r_norm_sq: ScalarField,
    /// |Ric¹|²_g.
    pub ric1_norm_sq: ScalarField,
    /// |Ric²|²_h.
    pub ric2_norm_sq: ScalarField,
    /// |T|² of the traceless part.
    pub t_norm_sq: ScalarField,
    /// The traceless part itself, same block layout as the input.
    pub t_blocks: Vec<MatrixField>,
}

/// Quantitative inequality report for either curvature flavor.
#[derive(Clone, Debug)]
pub struct ChernReport {
    pub kind: CurvatureKind,
    /// ∫ c₁² ∧ ω^{n−2} evaluated through the scalar integrand.
    pub i_c1sq: f64,
    /// ∫ c₂ ∧ ω^{n−2}.
    pub i_c2: f64,
    /// ∫ |T|² ω^n.
    pub t_norm_sq_integral: f64,
    /// Measured eigenvalue extrema of the trace endomorphism.
    pub a: f64,
    pub b: f64,
    /// Spread term (b − a)² entering the right-hand side.
    pub spread_bound: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// sup-norm defect of the pointwise combination identity.
    pub decomposition_defect: f64,
    /// sup-norm defect of the |T|² norm identity.
    pub norm_identity_defect: f64,
    /// sup-norm defect of s² − r|Ric|² = −Σ_{i<j}(λ_i−λ_j)².
    pub spread_identity_defect: f64,
    /// Quadrature tolerance used for the pass verdict.
    pub tol: f64,
}

impl ChernReport {
    pub fn summary(&self) -> String {
        format!(
            "kind={:?} lhs={:.6e} rhs={:.6e} pass={} a={:.4e} b={:.4e} c1^2={:.6e} c2={:.6e} \
             intT2={:.6e} defects: decomposition={:.2e} norm={:.2e} spread={:.2e}",
            self.kind,
            self.lhs,
            self.rhs,
            self.pass,
            self.a,
            self.b,
            self.i_c1sq,
            self.i_c2,
            self.t_norm_sq_integral,
            self.decomposition_defect,
            self.norm_identity_defect,
            self.spread_identity_defect
        )
    }
}

/// ∫ f ω^n over the torus (the rectangle rule carries ω^n/n!).
fn integral_omega_n(f: &ScalarField) -> f64 {
    let n = f.geometry().n() as u32;
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    (f.integrate() * factorial).re
}

/// |A|² under h-contraction of both fiber index pairs: tr(h⁻¹A h⁻¹A*).
fn h_norm_sq(a: &MatrixField, h_inv: &MatrixField) -> ScalarField {
    let mut out = h_inv
        .mul_unchecked(a)
        .mul_unchecked(h_inv)
        .mul_unchecked(&a.conj_transpose())
        .trace();
    out.enforce_real();
    out
}

/// Pointwise traces, norms, and traceless part T of a bundle curvature.
pub fn bundle_invariants(rf: &CurvatureField) -> Result<BundleInvariants> {
    if rf.kind() != CurvatureKind::Bundle {
        return Err(HymError::Contract(
            "bundle_invariants needs bundle curvature".into(),
        ));
    }
    let geom = rf.geometry().clone();
    let n = rf.n();
    let r = rf.rank();
    let h = rf.fiber_metric();
    let h_inv = h.inverse()?;

    // Ric¹_{ij̄} = tr(R_{ij̄}·h⁻¹) per block
    let mut ric1 = MatrixField::zeros(&geom, n);
    for i in 0..n {
        for j in 0..n {
            let tr = rf.block(i, j).mul_unchecked(&h_inv).trace();
            for (p, v) in tr.data().iter().enumerate() {
                ric1.block_mut(p)[i * n + j] = *v;
            }
        }
    }
    ric1.set_hermitian_flag(true);

    let mut ric2 = MatrixField::zeros(&geom, r);
    for k in 0..n {
        ric2 = ric2.add(rf.block(k, k));
    }
    let ric2 = ric2.hermitian_project();

    let mut s = ric2.mul_unchecked(&h_inv).trace();
    s.enforce_real();

    let mut r_norm_sq = ScalarField::zeros(&geom);
    for b in rf.blocks() {
        r_norm_sq = r_norm_sq.add(&h_norm_sq(b, &h_inv));
    }
    r_norm_sq.enforce_real();

    let mut ric1_norm_sq = ric1.pointwise_pairing(&ric1);
    ric1_norm_sq.enforce_real();
    let ric2_norm_sq = h_norm_sq(&ric2, &h_inv);

    // T_{ij̄} = R_{ij̄} − (1/n)δ_ij Ric² − (1/r)Ric¹_{ij̄} h + (1/nr)δ_ij s h
    let mut t_blocks = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut ric1_ij = ScalarField::zeros(&geom);
            for (p, v) in ric1_ij
                .data_mut()
                .iter_mut()
                .enumerate()
            {
                *v = ric1.block(p)[i * n + j];
            }
            let mut t = rf
                .block(i, j)
                .sub(&h.scalar_mul(&ric1_ij).scale(1.0 / r as f64));
            if i == j {
                t = t
                    .sub(&ric2.scale(1.0 / n as f64))
                    .add(&h.scalar_mul(&s).scale(1.0 / (n * r) as f64));
            }
            t_blocks.push(t);
        }
    }
    let mut t_norm_sq = ScalarField::zeros(&geom);
    for t in &t_blocks {
        t_norm_sq = t_norm_sq.add(&h_norm_sq(t, &h_inv));
    }
    t_norm_sq.enforce_real();

    Ok(BundleInvariants {
        ric1,
        ric2,
        s,
        r_norm_sq,
        ric1_norm_sq,
        ric2_norm_sq,
        t_norm_sq,
        t_blocks,
    })
}

/// (∫ c₁²(E)∧ω^{n−2}, ∫ c₂(E)∧ω^{n−2}) via the scalar integrand reductions.
pub fn bundle_chern_integrals(rf: &CurvatureField) -> Result<(f64, f64)> {
    let inv = bundle_invariants(rf)?;
    Ok(bundle_integrals_from(&inv, rf.n()))
}

fn bundle_integrals_from(inv: &BundleInvariants, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let s2 = inv.s.mul(&inv.s);
    let c1_integrand = s2.sub(&inv.ric1_norm_sq);
    let c2_integrand = c1_integrand.sub(&inv.ric2_norm_sq).add(&inv.r_norm_sq);
    let i_c1 = integral_omega_n(&c1_integrand) / (4.0 * PI * PI * nf * (nf - 1.0));
    let i_c2 = integral_omega_n(&c2_integrand) / (8.0 * PI * PI * nf * (nf - 1.0));
    (i_c1, i_c2)
}

/// Eigenvalues of the trace endomorphism Ric²·h⁻¹ at every point, via the
/// Hermitian similarity h^{-1/2}·Ric²·h^{-1/2}.
fn endo_eigenvalues(ric2: &MatrixField, h: &MatrixField) -> Result<Vec<Vec<f64>>> {
    let r = ric2.rank();
    let h_isqrt = h.sqrt()?.inverse()?;
    let w = h_isqrt.mul_unchecked(ric2).mul_unchecked(&h_isqrt);
    let mut out = Vec::with_capacity(ric2.geometry().num_points());
    for p in 0..ric2.geometry().num_points() {
        out.push(linalg::herm_eigenvalues(r, w.block(p)));
    }
    Ok(out)
}

/// Checks the bundle Chern number inequality on measured eigenvalue bounds.
pub fn bundle_inequality_check(rf: &CurvatureField) -> Result<ChernReport> {
    let n = rf.n();
    let r = rf.rank();
    let nf = n as f64;
    let rr = r as f64;
    let inv = bundle_invariants(rf)?;
    let (i_c1sq, i_c2) = bundle_integrals_from(&inv, n);

    let eigs = endo_eigenvalues(&inv.ric2, rf.fiber_metric())?;
    let a = eigs
        .iter()
        .map(|e| e[0])
        .fold(f64::INFINITY, f64::min);
    let b = eigs
        .iter()
        .map(|e| e[r - 1])
        .fold(f64::NEG_INFINITY, f64::max);

    let volume_omega_n = integral_omega_n(&ScalarField::constant(rf.geometry(), 1.0));
    let lhs = (rr - 1.0) * i_c1sq - 2.0 * rr * i_c2;
    let spread = (b - a) * (b - a);
    let rhs = rr * (rr - 1.0) * spread / (8.0 * PI * PI * nf * nf) * volume_omega_n;

    // pointwise identity defects (exact algebra, loud under any wrong
    // contraction convention)
    let s2 = inv.s.mul(&inv.s);
    let mut norm_defect = 0.0f64;
    let mut decomp_defect = 0.0f64;
    let mut spread_defect = 0.0f64;
    for p in 0..rf.geometry().num_points() {
        let s2p = s2.data()[p].re;
        let rn = inv.r_norm_sq.data()[p].re;
        let r1 = inv.ric1_norm_sq.data()[p].re;
        let r2 = inv.ric2_norm_sq.data()[p].re;
        let tn = inv.t_norm_sq.data()[p].re;
        norm_defect = norm_defect
            .max((tn - (rn - r2 / nf - r1 / rr + s2p / (nf * rr))).abs());
        let direct = s2p - r1 - rr * r2 + rr * rn;
        let via_t = rr * tn + (nf - 1.0) / nf * (s2p - rr * r2);
        decomp_defect = decomp_defect.max((direct - via_t).abs());
        let lam = &eigs[p];
        let mut pair_sum = 0.0;
        for i in 0..r {
            for j in (i + 1)..r {
                let d = lam[i] - lam[j];
                pair_sum += d * d;
            }
        }
        spread_defect = spread_defect.max(((s2p - rr * r2) + pair_sum).abs());
    }

    let tol = 1e-9 * (1.0 + lhs.abs() + rhs.abs());
    Ok(ChernReport {
        kind: CurvatureKind::Bundle,
        i_c1sq,
        i_c2,
        t_norm_sq_integral: integral_omega_n(&inv.t_norm_sq),
        a,
        b,
        spread_bound: spread,
        lhs,
        rhs,
        pass: lhs <= rhs + tol,
        decomposition_defect: decomp_defect,
        norm_identity_defect: norm_defect,
        spread_identity_defect: spread_defect,
        tol,
    })
}

/// Kähler invariants, the norm identity for the Bochner-decomposed T, and
/// the Kähler Chern number inequality check.
pub fn kahler_invariants_and_check(rf: &CurvatureField) -> Result<ChernReport> {
    if rf.kind() != CurvatureKind::Kahler {
        return Err(HymError::Contract(
            "kahler_invariants_and_check needs Kähler curvature".into(),
        ));
    }
    let geom = rf.geometry().clone();
    let n = rf.n();
    let nf = n as f64;
    let total = geom.num_points();

    let mut ric = MatrixField::zeros(&geom, n);
    for k in 0..n {
        ric = ric.add(rf.block(k, k));
    }
    let ric = ric.hermitian_project();
    let mut s = ric.trace();
    s.enforce_real();

    let at = |i: usize, j: usize, k: usize, l: usize, p: usize| -> Complex64 {
        rf.block(i, j).block(p)[k * n + l]
    };
    let ric_at = |k: usize, l: usize, p: usize| -> Complex64 { ric.block(p)[k * n + l] };

    // T_{ij̄kl̄} = R − (1/n)δ_ij Ric_kl − (1/n)Ric_ij δ_kl
    //            − (1/(n(n+1)))δ_il δ_kj s + ((n+2)/(n²(n+1)))δ_ij δ_kl s
    let c_cross = 1.0 / (nf * (nf + 1.0));
    let c_diag = (nf + 2.0) / (nf * nf * (nf + 1.0));
    let mut r_norm_sq = ScalarField::zeros(&geom);
    let mut ric_norm_sq = ScalarField::zeros(&geom);
    let mut t_norm_sq = ScalarField::zeros(&geom);
    for p in 0..total {
        let sp = s.data()[p].re;
        let mut rn = 0.0;
        let mut tn = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = at(i, j, k, l, p);
                        rn += v.norm_sqr();
                        let mut t = v;
                        if i == j {
                            t -= ric_at(k, l, p) / nf;
                        }
                        if k == l {
                            t -= ric_at(i, j, p) / nf;
                        }
                        if i == l && k == j {
                            t -= Complex64::new(c_cross * sp, 0.0);
                        }
                        if i == j && k == l {
                            t += Complex64::new(c_diag * sp, 0.0);
                        }
                        tn += t.norm_sqr();
                    }
                }
            }
        }
        let mut ricn = 0.0;
        for k in 0..n {
            for l in 0..n {
                ricn += ric_at(k, l, p).norm_sqr();
            }
        }
        r_norm_sq.data_mut()[p] = Complex64::new(rn, 0.0);
        ric_norm_sq.data_mut()[p] = Complex64::new(ricn, 0.0);
        t_norm_sq.data_mut()[p] = Complex64::new(tn, 0.0);
    }
    r_norm_sq.enforce_real();
    ric_norm_sq.enforce_real();
    t_norm_sq.enforce_real();

    let s2 = s.mul(&s);
    let c1_integrand = s2.sub(&ric_norm_sq);
    let c2_integrand = s2.sub(&ric_norm_sq.scale(2.0)).add(&r_norm_sq);
    let i_c1sq = integral_omega_n(&c1_integrand) / (4.0 * PI * PI * nf * (nf - 1.0));
    let i_c2 = integral_omega_n(&c2_integrand) / (8.0 * PI * PI * nf * (nf - 1.0));

    // eigenvalues of Ric against the flat g
    let mut a = f64::INFINITY;
    let mut b = f64::NEG_INFINITY;
    let mut norm_defect = 0.0f64;
    let mut decomp_defect = 0.0f64;
    let mut spread_defect = 0.0f64;
    for p in 0..total {
        let lam = linalg::herm_eigenvalues(n, ric.block(p));
        a = a.min(lam[0]);
        b = b.max(lam[n - 1]);
        let s2p = s2.data()[p].re;
        let rn = r_norm_sq.data()[p].re;
        let ricn = ric_norm_sq.data()[p].re;
        let tn = t_norm_sq.data()[p].re;
        norm_defect = norm_defect
            .max((tn - (rn - 2.0 / nf * ricn + 2.0 / (nf * nf * (nf + 1.0)) * s2p)).abs());
        let direct = s2p - (nf + 2.0) * ricn + (nf + 1.0) * rn;
        let via_t = (nf + 1.0) * tn + (1.0 - 2.0 / (nf * nf)) * (s2p - nf * ricn);
        decomp_defect = decomp_defect.max((direct - via_t).abs());
        let mut pair_sum = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = lam[i] - lam[j];
                pair_sum += d * d;
            }
        }
        spread_defect = spread_defect.max(((s2p - nf * ricn) + pair_sum).abs());
    }

    let volume_omega_n = integral_omega_n(&ScalarField::constant(&geom, 1.0));
    let lhs = nf * i_c1sq - 2.0 * (nf + 1.0) * i_c2;
    let spread = (b - a) * (b - a);
    let rhs = (nf * nf - 2.0) * spread / (8.0 * PI * PI * nf * nf) * volume_omega_n;
    let tol = 1e-9 * (1.0 + lhs.abs() + rhs.abs());

    Ok(ChernReport {
        kind: CurvatureKind::Kahler,
        i_c1sq,
        i_c2,
        t_norm_sq_integral: integral_omega_n(&t_norm_sq),
        a,
        b,
        spread_bound: spread,
        lhs,
        rhs,
        pass: lhs <= rhs + tol,
        decomposition_defect: decomp_defect,
        norm_identity_defect: norm_defect,
        spread_identity_defect: spread_defect,
        tol,
    })
}

/// Seeded band-limited Kähler-symmetric curvature data.
///
/// Draws independent complex band-limited components A_{ij̄kl̄}, then
/// symmetrizes in this order: (1) average over the two pair swaps
/// (i↔k) and (j↔l); (2) average with the Hermitian reflection
/// conj(X_{jīlk̄}). The result satisfies all Kähler symmetries exactly.
pub fn random_kahler_curvature(
    geom: &Arc<TorusGeometry>,
    seed: u64,
    bandwidth: usize,
    amplitude: f64,
) -> Result<CurvatureField> {
    let n = geom.n();
    let total = geom.num_points();
    let mut raw: Vec<Vec<Complex64>> = Vec::with_capacity(n * n * n * n);
    for idx in 0..(n * n * n * n) {
        let f = synth::random_complex_scalar(geom, seed ^ (0x9e37 + idx as u64), bandwidth, amplitude);
        raw.push(f.data().to_vec());
    }
    let at = |v: &[Vec<Complex64>], i: usize, j: usize, k: usize, l: usize, p: usize| {
        v[((i * n + j) * n + k) * n + l][p]
    };
    // (1) pair swaps
    let mut sym = vec![vec![Complex64::default(); total]; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let dst = ((i * n + j) * n + k) * n + l;
                    for p in 0..total {
                        sym[dst][p] = 0.25
                            * (at(&raw, i, j, k, l, p)
                                + at(&raw, k, j, i, l, p)
                                + at(&raw, i, l, k, j, p)
                                + at(&raw, k, l, i, j, p));
                    }
                }
            }
        }
    }
    // (2) Hermitian reflection
    let mut herm = vec![vec![Complex64::default(); total]; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let dst = ((i * n + j) * n + k) * n + l;
                    for p in 0..total {
                        herm[dst][p] =
                            0.5 * (at(&sym, i, j, k, l, p) + at(&sym, j, i, l, k, p).conj());
                    }
                }
            }
        }
    }
    let mut blocks = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut m = MatrixField::zeros(geom, n);
            for p in 0..total {
                let blk = m.block_mut(p);
                for k in 0..n {
                    for l in 0..n {
                        blk[k * n + l] = herm[((i * n + j) * n + k) * n + l][p];
                    }
                }
            }
            blocks.push(m);
        }
    }
    CurvatureField::new(CurvatureKind::Kahler, blocks, MatrixField::identity(geom, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t4() -> Arc<TorusGeometry> {
        TorusGeometry::square(2, 8, 1.0).unwrap()
    }

    fn constant_bundle(c: f64, r: usize) -> CurvatureField {
        // R_{ij̄αβ̄} = c δ_ij δ_αβ with h = Id
        let g = t4();
        let n = 2;
        let mut blocks = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let b = if i == j {
                    MatrixField::identity(&g, r).scale(c)
                } else {
                    MatrixField::zeros(&g, r)
                };
                blocks.push(b);
            }
        }
        CurvatureField::new(CurvatureKind::Bundle, blocks, MatrixField::identity(&g, r)).unwrap()
    }

    #[test]
    fn zero_curvature_gives_zero_report() {
        let g = t4();
        let blocks = (0..4).map(|_| MatrixField::zeros(&g, 2)).collect();
        let rf =
            CurvatureField::new(CurvatureKind::Bundle, blocks, MatrixField::identity(&g, 2))
                .unwrap();
        let (c1, c2) = bundle_chern_integrals(&rf).unwrap();
        assert_eq!(c1, 0.0);
        assert_eq!(c2, 0.0);
        let rep = bundle_inequality_check(&rf).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.rhs, 0.0);
    }

    #[test]
    fn constant_bundle_closed_forms() {
        // Ric¹ = rc·δ, Ric² = nc·δ, s = nrc, T = 0.
        let c = 0.7;
        let r = 3;
        let rf = constant_bundle(c, r);
        let inv = bundle_invariants(&rf).unwrap();
        let n = 2.0;
        let rr = r as f64;
        assert!((inv.s.max_real() - n * rr * c).abs() < 1e-12);
        assert!(inv.t_norm_sq.sup_norm() < 1e-12);
        let vol_omega = 2.0 * rf.geometry().volume();
        let (c1, c2) = bundle_chern_integrals(&rf).unwrap();
        // closed forms evaluated from the scalar integrands
        let s2 = (n * rr * c) * (n * rr * c);
        let ric1sq = n * rr * rr * c * c;
        let ric2sq = n * n * c * c * rr;
        let rsq = n * c * c * rr;
        let expect_c1 = (s2 - ric1sq) * vol_omega / (4.0 * PI * PI * n * (n - 1.0));
        let expect_c2 = (s2 - ric1sq - ric2sq + rsq) * vol_omega / (8.0 * PI * PI * n * (n - 1.0));
        assert!((c1 - expect_c1).abs() < 1e-10 * expect_c1.abs());
        assert!((c2 - expect_c2).abs() < 1e-10 * expect_c2.abs());
        // Hermitian-Einstein-like: spread vanishes, classical inequality
        let rep = bundle_inequality_check(&rf).unwrap();
        assert!((rep.a - rep.b).abs() < 1e-10);
        assert!(rep.pass);
        assert!(rep.lhs.abs() < rep.tol);
    }

    #[test]
    fn constant_kahler_space_form() {
        // R_{ij̄kl̄} = c(δ_ij δ_kl + δ_il δ_kj): T = 0, a = b.
        let g = t4();
        let n = 2usize;
        let c = 0.4;
        let mut blocks = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut m = MatrixField::zeros(&g, n);
                for p in 0..g.num_points() {
                    let blk = m.block_mut(p);
                    for k in 0..n {
                        for l in 0..n {
                            let mut v = 0.0;
                            if i == j && k == l {
                                v += c;
                            }
                            if i == l && k == j {
                                v += c;
                            }
                            blk[k * n + l] = Complex64::new(v, 0.0);
                        }
                    }
                }
                blocks.push(m);
            }
        }
        let rf =
            CurvatureField::new(CurvatureKind::Kahler, blocks, MatrixField::identity(&g, n))
                .unwrap();
        let rep = kahler_invariants_and_check(&rf).unwrap();
        assert!(rep.t_norm_sq_integral.abs() < 1e-10);
        assert!((rep.a - rep.b).abs() < 1e-12);
        assert!(rep.pass);
        assert!(rep.norm_identity_defect < 1e-12);
        assert!(rep.decomposition_defect < 1e-11);
    }

    #[test]
    fn symmetry_violation_rejected() {
        let g = t4();
        let mut blocks: Vec<MatrixField> = (0..4).map(|_| MatrixField::zeros(&g, 2)).collect();
        // break the Hermitian block symmetry
        blocks[1] = MatrixField::identity(&g, 2);
        let r = CurvatureField::new(
            CurvatureKind::Bundle,
            blocks,
            MatrixField::identity(&g, 2),
        );
        assert!(r.is_err());
    }

    #[test]
    fn random_kahler_identities() {
        let g = t4();
        let rf = random_kahler_curvature(&g, 7, 1, 0.8).unwrap();
        let rep = kahler_invariants_and_check(&rf).unwrap();
        assert!(rep.norm_identity_defect < 1e-9, "{}", rep.norm_identity_defect);
        assert!(rep.decomposition_defect < 1e-9, "{}", rep.decomposition_defect);
        assert!(rep.spread_identity_defect < 1e-9);
        assert!(rep.pass);
        // scaling covariance
        let rep2 = kahler_invariants_and_check(&rf.scaled(2.0)).unwrap();
        assert!((rep2.lhs - 4.0 * rep.lhs).abs() < 1e-8 * (1.0 + rep.lhs.abs()));
        assert!((rep2.rhs - 4.0 * rep.rhs).abs() < 1e-8 * (1.0 + rep.rhs.abs()));
        assert!(rep2.pass);
    }
}
