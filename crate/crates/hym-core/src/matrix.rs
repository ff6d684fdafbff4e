//! Pointwise r×r complex-matrix fields and their Hermitian algebra.
//!
//! On the model bundle E = L^⊕r over the flat torus the endomorphism bundle
//! is globally trivial, so sections of End(E) against the reference metric
//! are plain matrix-valued functions: a `MatrixField` stores one row-major
//! r×r complex block per grid point. Sections that are Hermitian with
//! respect to the reference metric are exactly the pointwise Hermitian
//! matrix fields; the `hermitian` flag tracks that invariant.
//!
//! Products are pointwise matrix products, (P·Q)ᵅᵞ = Pᵅᵝ Qᵝᵞ, and the
//! global pairing is ∫ tr(A·B*) ω^n/n!.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{HymError, Result};
use crate::geometry::{Deriv, ScalarField, TorusGeometry};
use crate::linalg;

/// A field is treated as positive definite when its smallest pointwise
/// eigenvalue stays above this floor; solvers damp steps to maintain it.
pub const POSITIVITY_FLOOR: f64 = 1e-10;

/// An r×r complex matrix sampled at every grid point of a torus.
#[derive(Clone)]
pub struct MatrixField {
    geom: Arc<TorusGeometry>,
    r: usize,
    data: Vec<Complex64>,
    hermitian: bool,
}

impl std::fmt::Debug for MatrixField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatrixField")
            .field("r", &self.r)
            .field("points", &self.geom.num_points())
            .field("hermitian", &self.hermitian)
            .finish()
    }
}

impl MatrixField {
    pub fn zeros(geom: &Arc<TorusGeometry>, r: usize) -> Self {
        Self {
            geom: geom.clone(),
            r,
            data: vec![Complex64::default(); geom.num_points() * r * r],
            hermitian: true,
        }
    }

    pub fn identity(geom: &Arc<TorusGeometry>, r: usize) -> Self {
        let mut f = Self::zeros(geom, r);
        for p in 0..geom.num_points() {
            for i in 0..r {
                f.data[p * r * r + i * r + i] = Complex64::new(1.0, 0.0);
            }
        }
        f
    }

    /// Constant field equal to `block` (row-major r×r) at every point.
    pub fn constant(geom: &Arc<TorusGeometry>, r: usize, block: &[Complex64]) -> Self {
        assert_eq!(block.len(), r * r);
        let mut f = Self::zeros(geom, r);
        for p in 0..geom.num_points() {
            f.data[p * r * r..(p + 1) * r * r].copy_from_slice(block);
        }
        f.hermitian = herm_defect_block(r, block) == 0.0;
        f
    }

    /// Builds a field from a per-point closure filling a row-major block.
    pub fn from_fn(
        geom: &Arc<TorusGeometry>,
        r: usize,
        mut f: impl FnMut(usize, &mut [Complex64]),
    ) -> Self {
        let mut out = Self::zeros(geom, r);
        for p in 0..geom.num_points() {
            f(p, &mut out.data[p * r * r..(p + 1) * r * r]);
        }
        out.hermitian = false;
        out
    }

    /// Diagonal field φ·Id from a scalar field.
    pub fn scalar_diag(phi: &ScalarField, r: usize) -> Self {
        let geom = phi.geometry().clone();
        let mut out = Self::zeros(&geom, r);
        for (p, v) in phi.data().iter().enumerate() {
            for i in 0..r {
                out.data[p * r * r + i * r + i] = *v;
            }
        }
        out.hermitian = phi.is_real();
        out
    }

    pub fn from_samples(
        geom: &Arc<TorusGeometry>,
        r: usize,
        data: Vec<Complex64>,
    ) -> Result<Self> {
        if data.len() != geom.num_points() * r * r {
            return Err(HymError::Shape(format!(
                "sample count {} does not match grid {} x rank {}^2",
                data.len(),
                geom.num_points(),
                r
            )));
        }
        Ok(Self {
            geom: geom.clone(),
            r,
            data,
            hermitian: false,
        })
    }

    pub fn geometry(&self) -> &Arc<TorusGeometry> {
        &self.geom
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn is_hermitian_flagged(&self) -> bool {
        self.hermitian
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Row-major block at grid point `p`.
    pub fn block(&self, p: usize) -> &[Complex64] {
        &self.data[p * self.r * self.r..(p + 1) * self.r * self.r]
    }

    pub fn block_mut(&mut self, p: usize) -> &mut [Complex64] {
        self.hermitian = false;
        let rr = self.r * self.r;
        &mut self.data[p * rr..(p + 1) * rr]
    }

    pub(crate) fn set_hermitian_flag(&mut self, value: bool) {
        self.hermitian = value;
    }

    fn check_compatible(&self, other: &MatrixField) -> Result<()> {
        if !self.geom.same_grid(&other.geom) {
            return Err(HymError::Shape(
                "matrix fields live on different grids".into(),
            ));
        }
        if self.r != other.r {
            return Err(HymError::Shape(format!(
                "rank mismatch: {} vs {}",
                self.r, other.r
            )));
        }
        Ok(())
    }

    /// Pointwise matrix product A·B; the result carries no Hermitian flag.
    pub fn product(&self, other: &MatrixField) -> Result<MatrixField> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &MatrixField) -> MatrixField {
        let r = self.r;
        let mut out = MatrixField::zeros(&self.geom, r);
        out.hermitian = false;
        for p in 0..self.geom.num_points() {
            linalg::matmul(
                r,
                self.block(p),
                other.block(p),
                &mut out.data[p * r * r..(p + 1) * r * r],
            );
        }
        out
    }

    pub fn add(&self, other: &MatrixField) -> MatrixField {
        assert!(self.check_compatible(other).is_ok());
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        MatrixField {
            geom: self.geom.clone(),
            r: self.r,
            data,
            hermitian: self.hermitian && other.hermitian,
        }
    }

    pub fn sub(&self, other: &MatrixField) -> MatrixField {
        assert!(self.check_compatible(other).is_ok());
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        MatrixField {
            geom: self.geom.clone(),
            r: self.r,
            data,
            hermitian: self.hermitian && other.hermitian,
        }
    }

    pub fn scale(&self, c: f64) -> MatrixField {
        MatrixField {
            geom: self.geom.clone(),
            r: self.r,
            data: self.data.iter().map(|a| a * c).collect(),
            hermitian: self.hermitian,
        }
    }

    pub fn scale_complex(&self, c: Complex64) -> MatrixField {
        MatrixField {
            geom: self.geom.clone(),
            r: self.r,
            data: self.data.iter().map(|a| a * c).collect(),
            hermitian: self.hermitian && c.im == 0.0,
        }
    }

    /// self + c·other.
    pub fn add_scaled(&self, c: f64, other: &MatrixField) -> MatrixField {
        assert!(self.check_compatible(other).is_ok());
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + c * b)
            .collect();
        MatrixField {
            geom: self.geom.clone(),
            r: self.r,
            data,
            hermitian: self.hermitian && other.hermitian,
        }
    }

    /// Pointwise multiplication by a scalar field.
    pub fn scalar_mul(&self, phi: &ScalarField) -> MatrixField {
        assert!(self.geom.same_grid(phi.geometry()));
        let rr = self.r * self.r;
        let mut data = self.data.clone();
        for (p, v) in phi.data().iter().enumerate() {
            for e in data[p * rr..(p + 1) * rr].iter_mut() {
                *e *= v;
            }
        }
        MatrixField {
            geom: self.geom.clone(),
            r: self.r,
            data,
            hermitian: self.hermitian && phi.is_real(),
        }
    }

    pub fn conj_transpose(&self) -> MatrixField {
        let r = self.r;
        let mut out = MatrixField::zeros(&self.geom, r);
        for p in 0..self.geom.num_points() {
            linalg::conj_t(r, self.block(p), &mut out.data[p * r * r..(p + 1) * r * r]);
        }
        out.hermitian = self.hermitian;
        out
    }

    /// (A + A*)/2, the pointwise-nearest Hermitian field in Frobenius norm.
    pub fn hermitian_project(&self) -> MatrixField {
        let r = self.r;
        let mut out = self.clone();
        for p in 0..self.geom.num_points() {
            let base = p * r * r;
            for i in 0..r {
                for j in i..r {
                    let a = self.data[base + i * r + j];
                    let b = self.data[base + j * r + i].conj();
                    let h = 0.5 * (a + b);
                    out.data[base + i * r + j] = h;
                    out.data[base + j * r + i] = h.conj();
                }
                out.data[base + i * r + i].im = 0.0;
            }
        }
        out.hermitian = true;
        out
    }

    /// sup over the grid of ‖A − A*‖_F, the deviation from Hermitian symmetry.
    pub fn herm_defect(&self) -> f64 {
        (0..self.geom.num_points())
            .map(|p| herm_defect_block(self.r, self.block(p)))
            .fold(0.0, f64::max)
    }

    /// Pointwise smallest/largest eigenvalue as real scalar fields.
    /// Requires the Hermitian flag.
    pub fn eigen_range(&self) -> Result<(ScalarField, ScalarField)> {
        self.require_hermitian("eigen_range")?;
        let mut lo = ScalarField::zeros(&self.geom);
        let mut hi = ScalarField::zeros(&self.geom);
        for p in 0..self.geom.num_points() {
            let (a, b) = linalg::herm_eigen_bounds(self.r, self.block(p));
            lo.data_mut()[p] = Complex64::new(a, 0.0);
            hi.data_mut()[p] = Complex64::new(b, 0.0);
        }
        lo.enforce_real();
        hi.enforce_real();
        Ok((lo, hi))
    }

    /// Global smallest eigenvalue and the grid point attaining it.
    pub fn min_eigenvalue(&self) -> Result<(f64, usize)> {
        self.require_hermitian("min_eigenvalue")?;
        let mut best = (f64::INFINITY, 0usize);
        for p in 0..self.geom.num_points() {
            let (a, _) = linalg::herm_eigen_bounds(self.r, self.block(p));
            if a < best.0 {
                best = (a, p);
            }
        }
        Ok(best)
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        self.require_hermitian("max_eigenvalue")?;
        let mut best = f64::NEG_INFINITY;
        for p in 0..self.geom.num_points() {
            let (_, b) = linalg::herm_eigen_bounds(self.r, self.block(p));
            best = best.max(b);
        }
        Ok(best)
    }

    fn require_hermitian(&self, op: &str) -> Result<()> {
        if !self.hermitian {
            return Err(HymError::NotHermitian(op.into()));
        }
        Ok(())
    }

    fn require_positive(&self, op: &str) -> Result<()> {
        self.require_hermitian(op)?;
        let (lmin, point) = self.min_eigenvalue()?;
        if lmin <= 0.0 {
            return Err(HymError::NotPositive {
                point,
                lambda_min: lmin,
            });
        }
        Ok(())
    }

    /// Pointwise inverse of a Hermitian positive field.
    pub fn inverse(&self) -> Result<MatrixField> {
        self.require_positive("inverse")?;
        let r = self.r;
        let mut out = MatrixField::zeros(&self.geom, r);
        for p in 0..self.geom.num_points() {
            match linalg::invert(r, self.block(p)) {
                Some(inv) => out.data[p * r * r..(p + 1) * r * r].copy_from_slice(&inv),
                None => {
                    let (lmin, _) = linalg::herm_eigen_bounds(r, self.block(p));
                    return Err(HymError::NotPositive {
                        point: p,
                        lambda_min: lmin,
                    });
                }
            }
        }
        out.hermitian = true;
        Ok(out)
    }

    /// Pointwise principal square root of a Hermitian positive field.
    pub fn sqrt(&self) -> Result<MatrixField> {
        self.require_positive("sqrt")?;
        Ok(self.spectral_map(f64::sqrt))
    }

    /// Pointwise matrix exponential of a Hermitian field.
    pub fn exp(&self) -> Result<MatrixField> {
        self.require_hermitian("exp")?;
        Ok(self.spectral_map(f64::exp))
    }

    fn spectral_map(&self, f: impl Fn(f64) -> f64 + Copy) -> MatrixField {
        let r = self.r;
        let mut out = MatrixField::zeros(&self.geom, r);
        for p in 0..self.geom.num_points() {
            let blk = linalg::herm_spectral_fn(r, self.block(p), f);
            out.data[p * r * r..(p + 1) * r * r].copy_from_slice(&blk);
        }
        out.hermitian = true;
        out
    }

    /// Pointwise trace as a scalar field.
    pub fn trace(&self) -> ScalarField {
        let r = self.r;
        let mut out = ScalarField::zeros(&self.geom);
        for p in 0..self.geom.num_points() {
            let mut t = Complex64::default();
            for i in 0..r {
                t += self.data[p * r * r + i * r + i];
            }
            out.data_mut()[p] = t;
        }
        if self.hermitian {
            out.enforce_real();
        }
        out
    }

    /// Entrywise spectral derivative; the result carries no Hermitian flag.
    pub fn derivative(&self, i: usize, kind: Deriv) -> Result<MatrixField> {
        if i >= self.geom.n() {
            return Err(HymError::Index {
                index: i,
                n: self.geom.n(),
            });
        }
        let sym = self.geom.deriv_symbol(i, kind == Deriv::AntiHolomorphic);
        Ok(self.apply_complex_symbol(&sym))
    }

    pub(crate) fn apply_complex_symbol(&self, sym: &[Complex64]) -> MatrixField {
        let mut out = self.clone();
        out.hermitian = false;
        out.for_each_entry_grid(|grid| self.geom.apply_complex_symbol(grid, sym));
        out
    }

    pub(crate) fn apply_real_symbol(&self, sym: &[f64]) -> MatrixField {
        let mut out = self.clone();
        let was_hermitian = self.hermitian;
        out.for_each_entry_grid(|grid| self.geom.apply_real_symbol(grid, sym));
        // a real spectral symbol is a real convolution kernel, which
        // commutes with pointwise conjugate transposition
        if was_hermitian {
            out = out.hermitian_project();
        }
        out
    }

    /// Gathers each matrix entry onto a contiguous grid buffer, applies the
    /// transform, and scatters back.
    fn for_each_entry_grid(&mut self, mut f: impl FnMut(&mut [Complex64])) {
        let r = self.r;
        let rr = r * r;
        let total = self.geom.num_points();
        let mut grid = vec![Complex64::default(); total];
        for e in 0..rr {
            for p in 0..total {
                grid[p] = self.data[p * rr + e];
            }
            f(&mut grid);
            for p in 0..total {
                self.data[p * rr + e] = grid[p];
            }
        }
    }

    /// sup over the grid of the pointwise operator norm of a Hermitian
    /// field, max(|λ_min|, |λ_max|).
    pub fn sup_hermitian_norm(&self) -> Result<f64> {
        self.require_hermitian("sup_hermitian_norm")?;
        let mut best = 0.0f64;
        for p in 0..self.geom.num_points() {
            let (a, b) = linalg::herm_eigen_bounds(self.r, self.block(p));
            best = best.max(a.abs()).max(b.abs());
        }
        Ok(best)
    }

    /// sup over the grid of the pointwise Frobenius norm.
    pub fn sup_norm(&self) -> f64 {
        let rr = self.r * self.r;
        (0..self.geom.num_points())
            .map(|p| {
                self.data[p * rr..(p + 1) * rr]
                    .iter()
                    .map(|v| v.norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// √∫ tr(A·A*) — the global L² norm.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.data.iter().map(|v| v.norm_sqr()).sum();
        (s * self.geom.cell_volume()).sqrt()
    }

    /// ∫ tr(A·B*) ω^n/n!, the reference global pairing h₀(A, B).
    pub fn pairing(&self, other: &MatrixField) -> Complex64 {
        assert!(self.check_compatible(other).is_ok());
        let s: Complex64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b.conj())
            .sum();
        s * self.geom.cell_volume()
    }

    /// tr(A·B*) pointwise as a scalar field.
    pub fn pointwise_pairing(&self, other: &MatrixField) -> ScalarField {
        assert!(self.check_compatible(other).is_ok());
        let rr = self.r * self.r;
        let mut out = ScalarField::zeros(&self.geom);
        for p in 0..self.geom.num_points() {
            let mut s = Complex64::default();
            for e in 0..rr {
                s += self.data[p * rr + e] * self.data_of(other, p, e).conj();
            }
            out.data_mut()[p] = s;
        }
        out
    }

    #[inline]
    fn data_of(&self, other: &MatrixField, p: usize, e: usize) -> Complex64 {
        other.data[p * self.r * self.r + e]
    }
}

fn herm_defect_block(r: usize, blk: &[Complex64]) -> f64 {
    let mut s = 0.0;
    for i in 0..r {
        for j in 0..r {
            s += (blk[i * r + j] - blk[j * r + i].conj()).norm_sqr();
        }
    }
    s.sqrt()
}

/// A matrix-valued (1,0)-form A = A_i dz^i: n matrix-field components.
#[derive(Clone, Debug)]
pub struct OneFormMatrixField {
    components: Vec<MatrixField>,
}

impl OneFormMatrixField {
    pub fn new(components: Vec<MatrixField>) -> Result<Self> {
        if components.is_empty() {
            return Err(HymError::Shape("one-form needs at least one component".into()));
        }
        let g = components[0].geometry().clone();
        let r = components[0].rank();
        if components.len() != g.n() {
            return Err(HymError::Shape(format!(
                "one-form needs n = {} components, got {}",
                g.n(),
                components.len()
            )));
        }
        for c in &components {
            if !c.geometry().same_grid(&g) || c.rank() != r {
                return Err(HymError::Shape(
                    "one-form components disagree in grid or rank".into(),
                ));
            }
        }
        Ok(Self { components })
    }

    pub fn component(&self, i: usize) -> &MatrixField {
        &self.components[i]
    }

    pub fn components(&self) -> &[MatrixField] {
        &self.components
    }

    pub fn geometry(&self) -> &Arc<TorusGeometry> {
        self.components[0].geometry()
    }

    pub fn rank(&self) -> usize {
        self.components[0].rank()
    }

    /// ∂*A = −Σ_k ∂̄_k A_k, the formal adjoint of ∂ on (1,0)-forms
    /// (the Bochner-Kodaira contraction √-1 Λ ∂̄ A).
    pub fn adjoint_div(&self) -> Result<MatrixField> {
        let geom = self.geometry().clone();
        let mut out = MatrixField::zeros(&geom, self.rank());
        for (i, a) in self.components.iter().enumerate() {
            let d = a.derivative(i, Deriv::AntiHolomorphic)?;
            out = out.add_scaled(-1.0, &d);
        }
        out.set_hermitian_flag(false);
        Ok(out)
    }

    /// Pointwise squared norm against a fiber metric represented by H:
    /// Σ_k tr(A_k · H · A_k* · H⁻¹). With H = Id this is the flat norm.
    pub fn norm_sq_weighted(&self, h: &MatrixField, h_inv: &MatrixField) -> Result<ScalarField> {
        let mut out = ScalarField::zeros(self.geometry());
        for a in &self.components {
            let term = a
                .product(h)?
                .product(&a.conj_transpose())?
                .product(h_inv)?
                .trace();
            out = out.add(&term);
        }
        out.enforce_real();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TorusGeometry;

    fn geom() -> Arc<TorusGeometry> {
        TorusGeometry::square(1, 8, 1.0).unwrap()
    }

    #[test]
    fn product_with_identity() {
        let g = geom();
        let a = MatrixField::from_fn(&g, 2, |p, blk| {
            blk[0] = Complex64::new(p as f64, 1.0);
            blk[1] = Complex64::new(0.5, -0.25);
            blk[2] = Complex64::new(-1.0, 2.0);
            blk[3] = Complex64::new(0.0, -(p as f64));
        });
        let id = MatrixField::identity(&g, 2);
        let prod = a.product(&id).unwrap();
        for (x, y) in prod.data().iter().zip(a.data()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn rank_mismatch_rejected() {
        let g = geom();
        let a = MatrixField::identity(&g, 2);
        let b = MatrixField::identity(&g, 3);
        assert!(a.product(&b).is_err());
    }

    #[test]
    fn hermitian_project_fixes_hermitian_and_kills_antihermitian() {
        let g = geom();
        let h = MatrixField::constant(
            &g,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(1.0, 3.0),
                Complex64::new(1.0, -3.0),
                Complex64::new(-1.0, 0.0),
            ],
        );
        let ph = h.hermitian_project();
        assert!(ph.sub(&h).sup_norm() < 1e-15);
        // anti-Hermitian block projects to zero
        let a = MatrixField::constant(
            &g,
            2,
            &[
                Complex64::new(0.0, 1.0),
                Complex64::new(2.0, 5.0),
                Complex64::new(-2.0, 5.0),
                Complex64::new(0.0, -4.0),
            ],
        );
        assert!(a.hermitian_project().sup_norm() < 1e-15);
    }

    #[test]
    fn eigen_range_constant_diag() {
        let g = geom();
        let a = MatrixField::constant(
            &g,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::default(),
                Complex64::default(),
                Complex64::new(3.0, 0.0),
            ],
        )
        .hermitian_project();
        let (lo, hi) = a.eigen_range().unwrap();
        assert!((lo.min_real() - 1.0).abs() < 1e-14);
        assert!((lo.max_real() - 1.0).abs() < 1e-14);
        assert!((hi.min_real() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_range_requires_flag() {
        let g = geom();
        let a = MatrixField::from_fn(&g, 2, |_, blk| {
            blk[0] = Complex64::new(1.0, 0.0);
        });
        assert!(matches!(a.eigen_range(), Err(HymError::NotHermitian(_))));
    }

    #[test]
    fn sqrt_of_diag() {
        let g = geom();
        let a = MatrixField::constant(
            &g,
            2,
            &[
                Complex64::new(4.0, 0.0),
                Complex64::default(),
                Complex64::default(),
                Complex64::new(9.0, 0.0),
            ],
        )
        .hermitian_project();
        let s = a.sqrt().unwrap();
        let sq = s.product(&s).unwrap();
        assert!(sq.sub(&a).sup_norm() < 1e-12);
        assert!((s.block(0)[0].re - 2.0).abs() < 1e-12);
        assert!((s.block(0)[3].re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_reports_worst_point() {
        let g = geom();
        let mut a = MatrixField::identity(&g, 2);
        let blk = a.block_mut(5);
        blk[0] = Complex64::new(-2.0, 0.0);
        let a = a.hermitian_project();
        match a.inverse() {
            Err(HymError::NotPositive { point, lambda_min }) => {
                assert_eq!(point, 5);
                assert!((lambda_min + 2.0).abs() < 1e-12);
            }
            other => panic!("expected positivity error, got {other:?}"),
        }
    }
}
