//! Dense linear algebra for small (r ≤ 8) complex matrices.
//!
//! Matrices are row-major `&[Complex64]` slices of length r². Hermitian
//! eigenproblems go through the real symmetric embedding
//!
//!   A = X + iY  ↦  [[X, −Y], [Y, X]]  (2r × 2r, symmetric),
//!
//! which doubles every eigenvalue and turns spectral functions f(A) into
//! f of the embedding, so one cyclic Jacobi routine covers eigenvalue
//! bounds, square roots, exponentials and inverses of Hermitian matrices.
//! Ranks 1 and 2 use closed forms for the eigenvalue bounds.

use num_complex::Complex64;

/// Cyclic Jacobi for a real symmetric matrix (row-major, n×n).
/// Returns eigenvalues (unsorted) and accumulated rotations V with
/// A = V diag(w) Vᵀ; V is row-major with eigenvectors in columns.
pub fn sym_eigen(n: usize, a_in: &[f64]) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(a_in.len(), n * n);
    let mut a = a_in.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[p * n + q] * a[p * n + q];
            }
        }
        s
    };
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(1e-300);

    for _sweep in 0..64 {
        if off(&a) <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let w = (0..n).map(|i| a[i * n + i]).collect();
    (w, v)
}

fn embed(r: usize, a: &[Complex64]) -> Vec<f64> {
    let m = 2 * r;
    let mut e = vec![0.0; m * m];
    for i in 0..r {
        for j in 0..r {
            let x = 0.5 * (a[i * r + j].re + a[j * r + i].re);
            let y = 0.5 * (a[i * r + j].im - a[j * r + i].im);
            e[i * m + j] = x;
            e[(i + r) * m + (j + r)] = x;
            e[(i + r) * m + j] = y;
            e[i * m + (j + r)] = -y;
        }
    }
    e
}

/// Smallest and largest eigenvalue of a Hermitian matrix.
pub fn herm_eigen_bounds(r: usize, a: &[Complex64]) -> (f64, f64) {
    match r {
        1 => {
            let v = a[0].re;
            (v, v)
        }
        2 => {
            let app = a[0].re;
            let aqq = a[3].re;
            let b = 0.5 * (a[1] + a[2].conj());
            let m = 0.5 * (app + aqq);
            let d = 0.5 * (app - aqq);
            let rad = (d * d + b.norm_sqr()).sqrt();
            (m - rad, m + rad)
        }
        _ => {
            let (w, _) = sym_eigen(2 * r, &embed(r, a));
            let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    }
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn herm_eigenvalues(r: usize, a: &[Complex64]) -> Vec<f64> {
    if r == 1 {
        return vec![a[0].re];
    }
    let (w, _) = sym_eigen(2 * r, &embed(r, a));
    let mut w = w;
    w.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // the embedding doubles each eigenvalue
    (0..r).map(|i| 0.5 * (w[2 * i] + w[2 * i + 1])).collect()
}

/// Spectral function f(A) of a Hermitian matrix via the real embedding.
pub fn herm_spectral_fn(r: usize, a: &[Complex64], f: impl Fn(f64) -> f64) -> Vec<Complex64> {
    if r == 1 {
        return vec![Complex64::new(f(a[0].re), 0.0)];
    }
    let m = 2 * r;
    let (w, v) = sym_eigen(m, &embed(r, a));
    // F = V f(diag) Vᵀ
    let mut fmat = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                s += v[i * m + k] * f(w[k]) * v[j * m + k];
            }
            fmat[i * m + j] = s;
        }
    }
    let mut out = vec![Complex64::default(); r * r];
    for i in 0..r {
        for j in 0..r {
            let x = 0.5 * (fmat[i * m + j] + fmat[(i + r) * m + (j + r)]);
            let y = 0.5 * (fmat[(i + r) * m + j] - fmat[i * m + (j + r)]);
            out[i * r + j] = Complex64::new(x, y);
        }
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting. Returns None when singular.
pub fn invert(r: usize, a: &[Complex64]) -> Option<Vec<Complex64>> {
    let mut m = a.to_vec();
    let mut inv = vec![Complex64::default(); r * r];
    for i in 0..r {
        inv[i * r + i] = Complex64::new(1.0, 0.0);
    }
    for col in 0..r {
        let mut piv = col;
        let mut best = m[col * r + col].norm();
        for row in (col + 1)..r {
            let v = m[row * r + col].norm();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return None;
        }
        if piv != col {
            for k in 0..r {
                m.swap(col * r + k, piv * r + k);
                inv.swap(col * r + k, piv * r + k);
            }
        }
        let d = m[col * r + col];
        for k in 0..r {
            m[col * r + k] /= d;
            inv[col * r + k] /= d;
        }
        for row in 0..r {
            if row == col {
                continue;
            }
            let factor = m[row * r + col];
            if factor.norm() == 0.0 {
                continue;
            }
            for k in 0..r {
                let mc = m[col * r + k];
                let ic = inv[col * r + k];
                m[row * r + k] -= factor * mc;
                inv[row * r + k] -= factor * ic;
            }
        }
    }
    Some(inv)
}

/// C = A·B for row-major r×r blocks.
#[inline]
pub fn matmul(r: usize, a: &[Complex64], b: &[Complex64], c: &mut [Complex64]) {
    for i in 0..r {
        for j in 0..r {
            let mut s = Complex64::default();
            for k in 0..r {
                s += a[i * r + k] * b[k * r + j];
            }
            c[i * r + j] = s;
        }
    }
}

/// Conjugate transpose of a row-major block.
#[inline]
pub fn conj_t(r: usize, a: &[Complex64], out: &mut [Complex64]) {
    for i in 0..r {
        for j in 0..r {
            out[i * r + j] = a[j * r + i].conj();
        }
    }
}
