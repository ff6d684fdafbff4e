//! Flat-torus spectral discretization.
//!
//! The base manifold is the flat torus T²ⁿ (n = 1 or 2) with the standard
//! metric g_{ij̄} = δ_ij and Kähler form ω = √-1 Σ dz^k ∧ dz̄^k, so that the
//! trace of a (1,1)-form is Λ_ω(√-1 α_{ij̄} dz^i∧dz̄^j) = Σ_k α_{kk̄} and the
//! function Laplacian is
//!
//!   Δ_g f = Σ_k ∂_k ∂̄_k f = ¼ Σ_a (∂²_{x_a} + ∂²_{y_a}) f.
//!
//! Real axes are ordered (x₁, y₁, x₂, y₂); axis a covers [0, L_a) with
//! dims[a] equispaced points and periodic wrap-around. All differentiation
//! is spectral (FFT); the holomorphic derivatives are
//!
//!   ∂_k = ½(∂_{x_k} − √-1 ∂_{y_k}),   ∂̄_k = ½(∂_{x_k} + √-1 ∂_{y_k}),
//!
//! exact on band-limited data. First derivatives zero the Nyquist mode (its
//! odd symbol is ambiguous); the Laplacian keeps the Nyquist mode with its
//! real second-derivative symbol so that `poisson_solve` inverts every mode
//! except the constant.
//!
//! The volume form gives ∫ ω^n/n! = 2ⁿ ∏ L_a, and `integrate` is the
//! periodic rectangle rule scaled so that integrate(1) reproduces exactly
//! that volume.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{HymError, Result};

/// Tolerance used by `poisson_solve` when checking that the right-hand side
/// is mean-zero: |∫ rhs| ≤ DEFAULT_MEAN_TOL · ‖rhs‖_L².
pub const DEFAULT_MEAN_TOL: f64 = 1e-8;

struct AxisPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Flat torus T²ⁿ with a fixed grid, periods and cached FFT plans.
pub struct TorusGeometry {
    n: usize,
    dims: Vec<usize>,
    periods: Vec<f64>,
    strides: Vec<usize>,
    volume: f64,
    plans: Vec<AxisPlan>,
    /// 2π k / L per axis with the Nyquist frequency kept (even symbols).
    khat_full: Vec<Vec<f64>>,
    /// 2π k / L per axis with the Nyquist frequency zeroed (odd symbols).
    khat_odd: Vec<Vec<f64>>,
}

impl std::fmt::Debug for TorusGeometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusGeometry")
            .field("n", &self.n)
            .field("dims", &self.dims)
            .field("periods", &self.periods)
            .field("volume", &self.volume)
            .finish()
    }
}

impl TorusGeometry {
    /// Builds a torus of complex dimension `n` (1 or 2). `dims` and
    /// `periods` give the 2n real axes in the order x₁, y₁, x₂, y₂.
    /// Every dims entry must be a power of two and at least 8.
    pub fn new(n: usize, dims: &[usize], periods: &[f64]) -> Result<Arc<Self>> {
        if n != 1 && n != 2 {
            return Err(HymError::Geometry(format!(
                "complex dimension must be 1 or 2, got {n}"
            )));
        }
        if dims.len() != 2 * n || periods.len() != 2 * n {
            return Err(HymError::Geometry(format!(
                "expected {} axes, got dims {} / periods {}",
                2 * n,
                dims.len(),
                periods.len()
            )));
        }
        for &d in dims {
            if d < 8 || !d.is_power_of_two() {
                return Err(HymError::Geometry(format!(
                    "axis size {d} must be a power of two >= 8"
                )));
            }
        }
        for &l in periods {
            if !(l > 0.0) || !l.is_finite() {
                return Err(HymError::Geometry(format!("period {l} must be positive")));
            }
        }

        let mut strides = vec![0usize; 2 * n];
        let mut s = 1usize;
        for a in (0..2 * n).rev() {
            strides[a] = s;
            s *= dims[a];
        }
        let volume = 2f64.powi(n as i32) * periods.iter().product::<f64>();

        let mut planner = FftPlanner::<f64>::new();
        let plans = dims
            .iter()
            .map(|&d| AxisPlan {
                forward: planner.plan_fft_forward(d),
                inverse: planner.plan_fft_inverse(d),
            })
            .collect();

        let mut khat_full = Vec::with_capacity(2 * n);
        let mut khat_odd = Vec::with_capacity(2 * n);
        for a in 0..2 * n {
            let d = dims[a];
            let l = periods[a];
            let mut full = vec![0.0; d];
            let mut odd = vec![0.0; d];
            for m in 0..d {
                let k = if m <= d / 2 {
                    m as f64
                } else {
                    m as f64 - d as f64
                };
                full[m] = 2.0 * PI * k / l;
                odd[m] = if m == d / 2 { 0.0 } else { 2.0 * PI * k / l };
            }
            khat_full.push(full);
            khat_odd.push(odd);
        }

        Ok(Arc::new(Self {
            n,
            dims: dims.to_vec(),
            periods: periods.to_vec(),
            strides,
            volume,
            plans,
            khat_full,
            khat_odd,
        }))
    }

    /// Square torus: every axis has `points` grid points and length `period`.
    pub fn square(n: usize, points: usize, period: f64) -> Result<Arc<Self>> {
        TorusGeometry::new(n, &vec![points; 2 * n], &vec![period; 2 * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    /// ∫ ω^n / n! over the torus.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn num_points(&self) -> usize {
        self.dims.iter().product()
    }

    /// Quadrature weight of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.volume / self.num_points() as f64
    }

    /// Whether two geometries describe the same discretized torus.
    pub fn same_grid(&self, other: &TorusGeometry) -> bool {
        std::ptr::eq(self, other)
            || (self.n == other.n && self.dims == other.dims && self.periods == other.periods)
    }

    /// Real coordinates of the grid point with flat index `flat`.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        (0..2 * self.n)
            .map(|a| {
                let idx = (flat / self.strides[a]) % self.dims[a];
                idx as f64 * self.periods[a] / self.dims[a] as f64
            })
            .collect()
    }

    /// Flat index of the grid point with per-axis indices `idx`.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), 2 * self.n);
        idx.iter()
            .zip(&self.strides)
            .map(|(&i, &s)| i * s)
            .sum()
    }

    fn fft_axis(&self, data: &mut [Complex64], axis: usize, inverse: bool) {
        let d = self.dims[axis];
        let stride = self.strides[axis];
        let plan = if inverse {
            &self.plans[axis].inverse
        } else {
            &self.plans[axis].forward
        };
        let total = self.num_points();
        let mut line = vec![Complex64::default(); d];
        let outer = total / (d * stride);
        for o in 0..outer {
            for i in 0..stride {
                let base = o * d * stride + i;
                for j in 0..d {
                    line[j] = data[base + j * stride];
                }
                plan.process(&mut line);
                for j in 0..d {
                    data[base + j * stride] = line[j];
                }
            }
        }
    }

    /// Unnormalized forward transform along every axis.
    pub(crate) fn fft_forward(&self, data: &mut [Complex64]) {
        for a in 0..2 * self.n {
            self.fft_axis(data, a, false);
        }
    }

    /// Inverse transform along every axis, scaled by 1/N.
    pub(crate) fn fft_inverse(&self, data: &mut [Complex64]) {
        for a in 0..2 * self.n {
            self.fft_axis(data, a, true);
        }
        let scale = 1.0 / self.num_points() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Per-axis mode index of a flat spectral index.
    #[inline]
    fn mode(&self, flat: usize, axis: usize) -> usize {
        (flat / self.strides[axis]) % self.dims[axis]
    }

    /// Symbol of ∂_i (holomorphic) or ∂̄_i per spectral grid point.
    pub(crate) fn deriv_symbol(&self, i: usize, conjugate: bool) -> Vec<Complex64> {
        let ax = 2 * i;
        let ay = 2 * i + 1;
        let total = self.num_points();
        let mut sym = vec![Complex64::default(); total];
        for (flat, s) in sym.iter_mut().enumerate() {
            let kx = self.khat_odd[ax][self.mode(flat, ax)];
            let ky = self.khat_odd[ay][self.mode(flat, ay)];
            // ∂ = ½(∂x − i ∂y) ↦ ½(ky + i kx);  ∂̄ = ½(∂x + i ∂y) ↦ ½(−ky + i kx)
            *s = if conjugate {
                Complex64::new(-0.5 * ky, 0.5 * kx)
            } else {
                Complex64::new(0.5 * ky, 0.5 * kx)
            };
        }
        sym
    }

    /// Symbol of Δ_g (real, ≤ 0, zero only at the constant mode).
    pub(crate) fn laplace_symbol(&self) -> Vec<f64> {
        let total = self.num_points();
        let mut sym = vec![0.0; total];
        for (flat, s) in sym.iter_mut().enumerate() {
            let mut acc = 0.0;
            for a in 0..2 * self.n {
                let k = self.khat_full[a][self.mode(flat, a)];
                acc += k * k;
            }
            *s = -0.25 * acc;
        }
        sym
    }

    /// Applies a diagonal spectral multiplier to a grid buffer in place.
    pub(crate) fn apply_complex_symbol(&self, data: &mut [Complex64], sym: &[Complex64]) {
        self.fft_forward(data);
        for (v, s) in data.iter_mut().zip(sym) {
            *v *= s;
        }
        self.fft_inverse(data);
    }

    pub(crate) fn apply_real_symbol(&self, data: &mut [Complex64], sym: &[f64]) {
        self.fft_forward(data);
        for (v, s) in data.iter_mut().zip(sym) {
            *v *= *s;
        }
        self.fft_inverse(data);
    }
}

/// Which first-order derivative to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    /// ∂_i = ½(∂_{x_i} − √-1 ∂_{y_i})
    Holomorphic,
    /// ∂̄_i = ½(∂_{x_i} + √-1 ∂_{y_i})
    AntiHolomorphic,
}

/// A complex (optionally real-flagged) function sampled on the full grid.
#[derive(Clone)]
pub struct ScalarField {
    geom: Arc<TorusGeometry>,
    data: Vec<Complex64>,
    real: bool,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("points", &self.data.len())
            .field("real", &self.real)
            .finish()
    }
}

impl ScalarField {
    pub fn zeros(geom: &Arc<TorusGeometry>) -> Self {
        Self {
            geom: geom.clone(),
            data: vec![Complex64::default(); geom.num_points()],
            real: true,
        }
    }

    pub fn constant(geom: &Arc<TorusGeometry>, c: f64) -> Self {
        Self {
            geom: geom.clone(),
            data: vec![Complex64::new(c, 0.0); geom.num_points()],
            real: true,
        }
    }

    /// Samples a real function of the grid coordinates.
    pub fn from_real_fn(geom: &Arc<TorusGeometry>, f: impl Fn(&[f64]) -> f64) -> Self {
        let data = (0..geom.num_points())
            .map(|p| Complex64::new(f(&geom.coords(p)), 0.0))
            .collect();
        Self {
            geom: geom.clone(),
            data,
            real: true,
        }
    }

    /// Samples a complex function of the grid coordinates.
    pub fn from_complex_fn(geom: &Arc<TorusGeometry>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let data = (0..geom.num_points()).map(|p| f(&geom.coords(p))).collect();
        Self {
            geom: geom.clone(),
            data,
            real: false,
        }
    }

    pub fn from_samples(geom: &Arc<TorusGeometry>, data: Vec<Complex64>, real: bool) -> Result<Self> {
        if data.len() != geom.num_points() {
            return Err(HymError::Shape(format!(
                "sample count {} does not match grid size {}",
                data.len(),
                geom.num_points()
            )));
        }
        let mut field = Self {
            geom: geom.clone(),
            data,
            real,
        };
        if real {
            field.enforce_real();
        }
        Ok(field)
    }

    pub fn geometry(&self) -> &Arc<TorusGeometry> {
        &self.geom
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        self.real = false;
        &mut self.data
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Marks the field real and zeroes the imaginary parts exactly.
    pub fn enforce_real(&mut self) {
        for v in self.data.iter_mut() {
            v.im = 0.0;
        }
        self.real = true;
    }

    /// First-order spectral derivative ∂_i or ∂̄_i, 0-based index i < n.
    pub fn derivative(&self, i: usize, kind: Deriv) -> Result<ScalarField> {
        if i >= self.geom.n() {
            return Err(HymError::Index {
                index: i,
                n: self.geom.n(),
            });
        }
        let sym = self.geom.deriv_symbol(i, kind == Deriv::AntiHolomorphic);
        let mut data = self.data.clone();
        self.geom.apply_complex_symbol(&mut data, &sym);
        Ok(ScalarField {
            geom: self.geom.clone(),
            data,
            real: false,
        })
    }

    /// Kähler Laplacian Δ_g f = Σ_k ∂_k ∂̄_k f (real-closed).
    pub fn laplacian(&self) -> ScalarField {
        let sym = self.geom.laplace_symbol();
        let mut data = self.data.clone();
        self.geom.apply_real_symbol(&mut data, &sym);
        let mut out = ScalarField {
            geom: self.geom.clone(),
            data,
            real: false,
        };
        if self.real {
            out.enforce_real();
        }
        out
    }

    /// Solves Δ_g u = rhs for the unique mean-zero u.
    ///
    /// Requires |∫ rhs| ≤ tol · ‖rhs‖_L²; the constant spectral mode of the
    /// right-hand side is dropped (it is below tolerance) and every other
    /// mode is divided by the Laplace symbol.
    pub fn poisson_solve(&self) -> Result<ScalarField> {
        self.poisson_solve_with_tol(DEFAULT_MEAN_TOL)
    }

    pub fn poisson_solve_with_tol(&self, tol_mean: f64) -> Result<ScalarField> {
        let integral = self.integrate();
        let norm = self.l2_norm();
        if integral.norm() > tol_mean * norm && norm > 0.0 {
            return Err(HymError::NotMeanZero {
                integral: integral.norm(),
                tol: tol_mean * norm,
            });
        }
        let sym = self.geom.laplace_symbol();
        let mut data = self.data.clone();
        self.geom.fft_forward(&mut data);
        for (v, s) in data.iter_mut().zip(&sym) {
            if *s == 0.0 {
                *v = Complex64::default();
            } else {
                *v /= *s;
            }
        }
        self.geom.fft_inverse(&mut data);
        let mut out = ScalarField {
            geom: self.geom.clone(),
            data,
            real: false,
        };
        if self.real {
            out.enforce_real();
        }
        Ok(out)
    }

    /// ∫ f ω^n/n! by the periodic rectangle rule.
    pub fn integrate(&self) -> Complex64 {
        let sum: Complex64 = self.data.iter().sum();
        sum * self.geom.cell_volume()
    }

    /// Mean value ∫ f / volume.
    pub fn mean(&self) -> Complex64 {
        self.integrate() / self.geom.volume()
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.data.iter().map(|v| v.norm_sqr()).sum();
        (s * self.geom.cell_volume()).sqrt()
    }

    pub fn min_real(&self) -> f64 {
        self.data.iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }

    pub fn max_real(&self) -> f64 {
        self.data
            .iter()
            .map(|v| v.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn check_same_grid(&self, other: &ScalarField) {
        assert!(
            self.geom.same_grid(&other.geom),
            "scalar fields live on different grids"
        );
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.check_same_grid(other);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        ScalarField {
            geom: self.geom.clone(),
            data,
            real: self.real && other.real,
        }
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.check_same_grid(other);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        ScalarField {
            geom: self.geom.clone(),
            data,
            real: self.real && other.real,
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        self.check_same_grid(other);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        ScalarField {
            geom: self.geom.clone(),
            data,
            real: self.real && other.real,
        }
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        let data = self.data.iter().map(|a| a * c).collect();
        ScalarField {
            geom: self.geom.clone(),
            data,
            real: self.real,
        }
    }

    pub fn add_constant(&self, c: f64) -> ScalarField {
        let data = self.data.iter().map(|a| a + c).collect();
        ScalarField {
            geom: self.geom.clone(),
            data,
            real: self.real,
        }
    }

    pub fn conj(&self) -> ScalarField {
        let data = self.data.iter().map(|a| a.conj()).collect();
        ScalarField {
            geom: self.geom.clone(),
            data,
            real: self.real,
        }
    }

    /// Pointwise map of the real part (input must be real-flagged).
    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        debug_assert!(self.real, "map_real on a complex field");
        let data = self
            .data
            .iter()
            .map(|v| Complex64::new(f(v.re), 0.0))
            .collect();
        ScalarField {
            geom: self.geom.clone(),
            data,
            real: true,
        }
    }

    /// e^f of a real field.
    pub fn exp(&self) -> ScalarField {
        self.map_real(f64::exp)
    }

    /// Σ_k |∂_k f|², the squared (1,0)-gradient against g.
    pub fn grad_norm_sq(&self) -> Result<ScalarField> {
        let mut out = ScalarField::zeros(&self.geom);
        for i in 0..self.geom.n() {
            let d = self.derivative(i, Deriv::Holomorphic)?;
            for (o, v) in out.data.iter_mut().zip(&d.data) {
                *o += v.norm_sqr();
            }
        }
        out.real = true;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t2(points: usize) -> Arc<TorusGeometry> {
        TorusGeometry::square(1, points, 1.0).unwrap()
    }

    #[test]
    fn volume_and_integrate_one() {
        let g = TorusGeometry::new(1, &[16, 32], &[1.0, 2.0]).unwrap();
        assert_eq!(g.volume(), 4.0);
        let one = ScalarField::constant(&g, 1.0);
        assert!((one.integrate().re - 4.0).abs() < 1e-14);
        let g4 = TorusGeometry::square(2, 8, 1.5).unwrap();
        assert!((g4.volume() - 4.0 * 1.5f64.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TorusGeometry::new(3, &[8; 6], &[1.0; 6]).is_err());
        assert!(TorusGeometry::new(1, &[8, 12], &[1.0, 1.0]).is_err());
        assert!(TorusGeometry::new(1, &[8, 4], &[1.0, 1.0]).is_err());
        assert!(TorusGeometry::new(1, &[8, 8], &[1.0, -1.0]).is_err());
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let g = t2(16);
        let c = ScalarField::constant(&g, 3.25);
        let d = c.derivative(0, Deriv::Holomorphic).unwrap();
        assert!(d.sup_norm() < 1e-13);
    }

    #[test]
    fn derivative_of_fourier_mode() {
        // f = exp(2πi x₁ / L₁): ∂₁ f = (πi/L₁) f, ∂̄₁ f = (πi/L₁) f as well
        // on the x-only mode (both pick up ½ ∂x).
        let g = t2(16);
        let f = ScalarField::from_complex_fn(&g, |x| {
            Complex64::new(0.0, 2.0 * PI * x[0]).exp()
        });
        let d = f.derivative(0, Deriv::Holomorphic).unwrap();
        let expected = f.data().iter().map(|v| v * Complex64::new(0.0, PI));
        let err = d
            .data()
            .iter()
            .zip(expected)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "err = {err}");
    }

    #[test]
    fn derivative_index_out_of_range() {
        let g = t2(8);
        let f = ScalarField::constant(&g, 1.0);
        assert!(matches!(
            f.derivative(1, Deriv::Holomorphic),
            Err(HymError::Index { .. })
        ));
    }

    #[test]
    fn laplacian_eigenfunction() {
        // Δ_g cos(2πx/L) = −(π²/L²) cos(2πx/L)
        let g = TorusGeometry::new(1, &[32, 16], &[2.0, 1.0]).unwrap();
        let f = ScalarField::from_real_fn(&g, |x| (2.0 * PI * x[0] / 2.0).cos());
        let lap = f.laplacian();
        let err = lap
            .data()
            .iter()
            .zip(f.data())
            .map(|(a, b)| (a - b * (-PI * PI / 4.0)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-11, "err = {err}");
        assert!(lap.is_real());
    }

    #[test]
    fn integrate_pure_mode_vanishes() {
        let g = t2(16);
        let f = ScalarField::from_complex_fn(&g, |x| {
            Complex64::new(0.0, 2.0 * PI * (3.0 * x[0] - x[1])).exp()
        });
        assert!(f.integrate().norm() < 1e-12);
    }

    #[test]
    fn poisson_rejects_nonzero_mean() {
        let g = t2(16);
        let f = ScalarField::constant(&g, 1.0);
        assert!(matches!(
            f.poisson_solve(),
            Err(HymError::NotMeanZero { .. })
        ));
    }

    #[test]
    fn poisson_single_mode() {
        // Δ u = cos(2πx/L) has u = −(L²/π²)·cos(2πx/L)... with our Δ the
        // eigenvalue is −π²/L², so u = −(L²/π²) rhs.
        let g = t2(32);
        let rhs = ScalarField::from_real_fn(&g, |x| (2.0 * PI * x[0]).cos());
        let u = rhs.poisson_solve().unwrap();
        let err = u
            .data()
            .iter()
            .zip(rhs.data())
            .map(|(a, b)| (a - b * (-1.0 / (PI * PI))).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "err = {err}");
    }

    #[test]
    fn poisson_zero_rhs() {
        let g = t2(16);
        let z = ScalarField::zeros(&g);
        let u = z.poisson_solve().unwrap();
        assert_eq!(u.sup_norm(), 0.0);
    }
}
