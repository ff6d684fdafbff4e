//! HYMF binary persistence and CSV/report writers.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic    b"HYMF"
//! version  u32      1 = plain field, 2 = curvature extension
//! n        u32      complex dimension
//! r        u32      fiber rank (1 for scalar fields)
//! dims     2n × u32
//! periods  2n × f64
//! -- version 2 only --
//! kind     u32      0 = bundle, 1 = kahler
//! comps    u32      curvature component count: n²r² (bundle) or n⁴ (kahler)
//! -- payload --
//! complex samples as f64 (re, im) pairs
//! ```
//!
//! Plain payloads are grid-row-major with the r×r block row-major inside
//! each point. Curvature payloads store the n² blocks sequentially
//! ((i,j̄) row-major, each a full plain payload), followed by the fiber
//! metric block for bundle curvature. Writers are pure functions of the
//! field data, so identical inputs produce bit-identical files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::chern::{CurvatureField, CurvatureKind};
use crate::error::{HymError, Result};
use crate::geometry::{ScalarField, TorusGeometry};
use crate::matrix::MatrixField;
use crate::solver::SolveReport;

const MAGIC: &[u8; 4] = b"HYMF";

struct Header {
    version: u32,
    n: usize,
    r: usize,
    dims: Vec<usize>,
    periods: Vec<f64>,
}

fn write_header<W: Write>(w: &mut W, version: u32, geom: &TorusGeometry, r: usize) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&version.to_le_bytes())?;
    w.write_all(&(geom.n() as u32).to_le_bytes())?;
    w.write_all(&(r as u32).to_le_bytes())?;
    for &d in geom.dims() {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for &p in geom.periods() {
        w.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(HymError::Format("bad magic bytes".into()));
    }
    let version = read_u32(r)?;
    if version != 1 && version != 2 {
        return Err(HymError::Format(format!("unsupported version {version}")));
    }
    let n = read_u32(r)? as usize;
    let rank = read_u32(r)? as usize;
    if n == 0 || n > 2 || rank == 0 || rank > 64 {
        return Err(HymError::Format(format!("implausible header n={n} r={rank}")));
    }
    let dims: Vec<usize> = (0..2 * n)
        .map(|_| read_u32(r).map(|v| v as usize))
        .collect::<Result<_>>()?;
    let periods: Vec<f64> = (0..2 * n).map(|_| read_f64(r)).collect::<Result<_>>()?;
    Ok(Header {
        version,
        n,
        r: rank,
        dims,
        periods,
    })
}

fn write_samples<W: Write>(w: &mut W, data: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(data.len() * 16);
    for v in data {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_samples<R: Read>(r: &mut R, count: usize) -> Result<Vec<Complex64>> {
    let mut buf = vec![0u8; count * 16];
    r.read_exact(&mut buf)?;
    let mut out = Vec::with_capacity(count);
    for chunk in buf.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

pub fn write_scalar_field(path: &Path, field: &ScalarField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, 1, field.geometry(), 1)?;
    write_samples(&mut w, field.data())?;
    w.flush()?;
    Ok(())
}

pub fn write_matrix_field(path: &Path, field: &MatrixField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, 1, field.geometry(), field.rank())?;
    write_samples(&mut w, field.data())?;
    w.flush()?;
    Ok(())
}

fn geometry_from_header(h: &Header) -> Result<Arc<TorusGeometry>> {
    TorusGeometry::new(h.n, &h.dims, &h.periods)
}

/// Reads a rank-1 field; the real flag is set when every imaginary part is
/// exactly zero.
pub fn read_scalar_field(path: &Path) -> Result<ScalarField> {
    let mut r = BufReader::new(File::open(path)?);
    let h = read_header(&mut r)?;
    if h.version != 1 || h.r != 1 {
        return Err(HymError::Format(format!(
            "expected a version-1 scalar field, got version {} rank {}",
            h.version, h.r
        )));
    }
    let geom = geometry_from_header(&h)?;
    let data = read_samples(&mut r, geom.num_points())?;
    let real = data.iter().all(|v| v.im == 0.0);
    ScalarField::from_samples(&geom, data, real)
}

/// Reads an r×r matrix field; the Hermitian flag is set when the symmetry
/// defect is at the 1e-12 relative level.
pub fn read_matrix_field(path: &Path) -> Result<MatrixField> {
    let mut r = BufReader::new(File::open(path)?);
    let h = read_header(&mut r)?;
    if h.version != 1 {
        return Err(HymError::Format("expected a version-1 field".into()));
    }
    let geom = geometry_from_header(&h)?;
    let data = read_samples(&mut r, geom.num_points() * h.r * h.r)?;
    let mut field = MatrixField::from_samples(&geom, h.r, data)?;
    let defect = field.herm_defect();
    if defect <= 1e-12 * field.sup_norm().max(f64::MIN_POSITIVE) {
        field.set_hermitian_flag(true);
    }
    Ok(field)
}

pub fn write_curvature_field(path: &Path, rf: &CurvatureField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let geom = rf.geometry();
    let n = geom.n();
    let r = rf.rank();
    write_header(&mut w, 2, geom, r)?;
    let kind = match rf.kind() {
        CurvatureKind::Bundle => 0u32,
        CurvatureKind::Kahler => 1u32,
    };
    w.write_all(&kind.to_le_bytes())?;
    let comps = (n * n * r * r) as u32;
    w.write_all(&comps.to_le_bytes())?;
    for b in rf.blocks() {
        write_samples(&mut w, b.data())?;
    }
    if rf.kind() == CurvatureKind::Bundle {
        write_samples(&mut w, rf.fiber_metric().data())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curvature_field(path: &Path) -> Result<CurvatureField> {
    let mut r = BufReader::new(File::open(path)?);
    let h = read_header(&mut r)?;
    if h.version != 2 {
        return Err(HymError::Format("expected a version-2 curvature file".into()));
    }
    let geom = geometry_from_header(&h)?;
    let n = geom.n();
    let kind = match read_u32(&mut r)? {
        0 => CurvatureKind::Bundle,
        1 => CurvatureKind::Kahler,
        k => return Err(HymError::Format(format!("unknown curvature kind {k}"))),
    };
    let comps = read_u32(&mut r)? as usize;
    if comps != n * n * h.r * h.r {
        return Err(HymError::Format(format!(
            "component count {comps} does not match n²r² = {}",
            n * n * h.r * h.r
        )));
    }
    let mut blocks = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let data = read_samples(&mut r, geom.num_points() * h.r * h.r)?;
        blocks.push(MatrixField::from_samples(&geom, h.r, data)?);
    }
    let fiber = if kind == CurvatureKind::Bundle {
        let data = read_samples(&mut r, geom.num_points() * h.r * h.r)?;
        let mut f = MatrixField::from_samples(&geom, h.r, data)?;
        if f.herm_defect() <= 1e-12 * f.sup_norm().max(f64::MIN_POSITIVE) {
            f.set_hermitian_flag(true);
        }
        f
    } else {
        MatrixField::identity(&geom, h.r)
    };
    CurvatureField::new(kind, blocks, fiber)
}

/// Residual history + diagnostics as CSV.
pub fn write_report_csv(path: &Path, report: &SolveReport) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "iter,t,residual_sup,residual_l2,sup_tr_h,sup_t_norm_sq,lambda_min_h,lambda_max_h"
    )?;
    for (i, d) in report.diagnostics.iter().enumerate() {
        writeln!(
            w,
            "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            i,
            d.t,
            d.residual_sup,
            d.residual_l2,
            d.sup_tr_h,
            d.sup_t_norm_sq,
            d.lambda_min_h,
            d.lambda_max_h
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable solve summary.
pub fn write_report_text(path: &Path, title: &str, report: &SolveReport) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{title}")?;
    writeln!(w, "status: {:?}", report.status)?;
    if !report.message.is_empty() {
        writeln!(w, "note: {}", report.message)?;
    }
    writeln!(w, "newton steps: {}", report.newton_steps)?;
    if let Some(last) = report.residual_history.last() {
        writeln!(w, "final residual (sup): {last:.6e}")?;
    }
    if let Some(d) = report.diagnostics.last() {
        writeln!(w, "sup tr H: {:.6e}", d.sup_tr_h)?;
        writeln!(w, "sup |dH H^-1|^2: {:.6e}", d.sup_t_norm_sq)?;
        writeln!(
            w,
            "eigenvalue range of H: [{:.6e}, {:.6e}]",
            d.lambda_min_h, d.lambda_max_h
        )?;
    }
    w.flush()?;
    Ok(())
}

/// (t, Q(t)) samples as CSV.
pub fn write_q_samples_csv(path: &Path, samples: &[(f64, f64)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,q")?;
    for (t, q) in samples {
        writeln!(w, "{t:.17e},{q:.17e}")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn scalar_roundtrip_bits() {
        let g = TorusGeometry::square(1, 8, 1.25).unwrap();
        let f = synth::random_real_scalar(&g, 11, 2, 0.7);
        let dir = std::env::temp_dir().join("hymf_scalar_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.hymf");
        write_scalar_field(&path, &f).unwrap();
        let back = read_scalar_field(&path).unwrap();
        assert_eq!(f.data(), back.data());
        assert!(back.is_real());
        assert!(back.geometry().same_grid(&g));
    }

    #[test]
    fn matrix_roundtrip_keeps_hermitian_flag() {
        let g = TorusGeometry::square(1, 8, 1.0).unwrap();
        let m = synth::random_hermitian_field(&g, 3, 9, 2, 1.0);
        let dir = std::env::temp_dir().join("hymf_matrix_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.hymf");
        write_matrix_field(&path, &m).unwrap();
        let back = read_matrix_field(&path).unwrap();
        assert_eq!(m.data(), back.data());
        assert!(back.is_hermitian_flagged());
    }

    #[test]
    fn rejects_bad_magic() {
        let dir = std::env::temp_dir().join("hymf_bad_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.hymf");
        std::fs::write(&path, b"NOPE0000").unwrap();
        assert!(matches!(
            read_scalar_field(&path),
            Err(HymError::Format(_)) | Err(HymError::Io(_))
        ));
    }
}
