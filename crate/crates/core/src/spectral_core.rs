//! Dense eigenvalue and singular-value computation.
//!
//! The numerical work is delegated to `faer`. What this module owns is the
//! contract around it: a size envelope, finite-input checks, canonical
//! ordering and an independent trace-moment residual check on every spectrum.

use faer::{Mat, MatRef, Side};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::C64;

/// Largest dense dimension accepted by the solvers.
pub const MAX_DENSE_DIM: usize = 20_000;

const FIRST_MOMENT_TOL: f64 = 1e-9;
const SECOND_MOMENT_TOL: f64 = 1e-8;

/// Trace-moment comparison between a spectrum and its source matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `|Σλ − tr A| / Σ|λ|`
    pub first_moment: f64,
    /// `|Σλ² − tr A²| / Σ|λ|²`
    pub second_moment: f64,
}

impl ResidualReport {
    pub fn passes(&self) -> bool {
        self.first_moment <= FIRST_MOMENT_TOL && self.second_moment <= SECOND_MOMENT_TOL
    }
}

/// Eigenvalues of one matrix, sorted by `(re, im)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSpectrum {
    pub values: Vec<C64>,
    pub residual: ResidualReport,
    /// Free-form provenance (model, sector, seed).
    pub source: String,
}

impl ComplexSpectrum {
    /// Wraps values that were not produced by a diagonalization (e.g. a
    /// spectrum assembled from a formula). The residual report is zeroed.
    pub fn from_values(mut values: Vec<C64>) -> Self {
        sort_complex(&mut values);
        Self { values, residual: ResidualReport::default(), source: String::new() }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Median modulus, the scale used for tolerance checks on spectra.
    pub fn median_modulus(&self) -> f64 {
        median(self.values.iter().map(|v| v.norm()).collect())
    }
}

/// Singular values in non-increasing order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
    /// Whether the trace was removed before the decomposition.
    pub traceless: bool,
}

pub fn sort_complex(values: &mut [C64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

pub(crate) fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// FNV-1a over the bit patterns of the entries; identifies failing inputs in
/// error payloads.
pub fn matrix_hash(m: MatRef<'_, C64>) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut feed = |x: u64| {
        for byte in x.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    feed(m.nrows() as u64);
    feed(m.ncols() as u64);
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            feed(v.re.to_bits());
            feed(v.im.to_bits());
        }
    }
    h
}

fn check_input(m: MatRef<'_, C64>, square: bool) -> Result<()> {
    let dim = m.nrows().max(m.ncols());
    if dim > MAX_DENSE_DIM {
        return Err(Error::SizeLimit { dim, limit: MAX_DENSE_DIM });
    }
    if square && m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite entry at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

fn spectral_error(m: MatRef<'_, C64>, reason: impl Into<String>) -> Error {
    Error::Spectral { dim: m.nrows(), hash: matrix_hash(m), reason: reason.into() }
}

/// Compares `Σλ`, `Σλ²` against `tr A`, `tr A²`.
pub fn trace_moments(m: MatRef<'_, C64>, values: &[C64]) -> ResidualReport {
    let n = m.nrows();
    let tr: C64 = (0..n).map(|i| m[(i, i)]).sum();
    let mut tr2 = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            tr2 += m[(i, j)] * m[(j, i)];
        }
    }
    let s1: C64 = values.iter().sum();
    let s2: C64 = values.iter().map(|v| v * v).sum();
    let abs1: f64 = values.iter().map(|v| v.norm()).sum();
    let abs2: f64 = values.iter().map(|v| v.norm_sqr()).sum();
    let rel = |err: f64, scale: f64| if scale > 0.0 { err / scale } else { err };
    ResidualReport { first_moment: rel((s1 - tr).norm(), abs1), second_moment: rel((s2 - tr2).norm(), abs2) }
}

/// All eigenvalues of a square complex matrix.
pub fn eigenvalues(m: MatRef<'_, C64>) -> Result<ComplexSpectrum> {
    check_input(m, true)?;
    if m.nrows() == 0 {
        return Ok(ComplexSpectrum::from_values(Vec::new()));
    }
    let mut values = m.eigenvalues().map_err(|e| spectral_error(m, format!("eigensolver: {e:?}")))?;
    sort_complex(&mut values);
    finish(m, values)
}

/// All eigenvalues of a square real matrix.
pub fn eigenvalues_real(m: MatRef<'_, f64>) -> Result<ComplexSpectrum> {
    let mc = complexify(m);
    check_input(mc.as_ref(), true)?;
    if m.nrows() == 0 {
        return Ok(ComplexSpectrum::from_values(Vec::new()));
    }
    let mut values = m.eigenvalues().map_err(|e| spectral_error(mc.as_ref(), format!("eigensolver: {e:?}")))?;
    sort_complex(&mut values);
    finish(mc.as_ref(), values)
}

fn finish(m: MatRef<'_, C64>, values: Vec<C64>) -> Result<ComplexSpectrum> {
    let residual = trace_moments(m, &values);
    if !residual.passes() {
        return Err(spectral_error(
            m,
            format!("trace-moment residuals {:.2e}/{:.2e} out of tolerance", residual.first_moment, residual.second_moment),
        ));
    }
    Ok(ComplexSpectrum { values, residual, source: String::new() })
}

/// Eigenvalues of a sparse matrix, densified first.
pub fn sparse_eigenvalues(m: &CsrMatrix) -> Result<ComplexSpectrum> {
    if m.nrows() > MAX_DENSE_DIM {
        return Err(Error::SizeLimit { dim: m.nrows(), limit: MAX_DENSE_DIM });
    }
    eigenvalues(m.to_dense().as_ref())
}

/// Ascending eigenvalues of a Hermitian matrix (lower triangle is read).
pub fn hermitian_eigenvalues(m: &CsrMatrix) -> Result<Vec<f64>> {
    if m.nrows() > MAX_DENSE_DIM {
        return Err(Error::SizeLimit { dim: m.nrows(), limit: MAX_DENSE_DIM });
    }
    let dense = m.to_dense();
    check_input(dense.as_ref(), true)?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let values: Vec<f64> = dense
        .as_ref()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| spectral_error(dense.as_ref(), format!("hermitian eigensolver: {e:?}")))?;
    let mut values = values;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `A − (tr A / d)·I`.
pub fn make_traceless(m: MatRef<'_, C64>) -> Mat<C64> {
    let n = m.nrows();
    let mut out = m.to_owned();
    if n == 0 {
        return out;
    }
    let shift: C64 = (0..n).map(|i| m[(i, i)]).sum::<C64>() / n as f64;
    for i in 0..n {
        out[(i, i)] -= shift;
    }
    out
}

pub fn make_traceless_real(m: MatRef<'_, f64>) -> Mat<f64> {
    let n = m.nrows();
    let mut out = m.to_owned();
    if n == 0 {
        return out;
    }
    let shift = (0..n).map(|i| m[(i, i)]).sum::<f64>() / n as f64;
    for i in 0..n {
        out[(i, i)] -= shift;
    }
    out
}

/// Singular values in non-increasing order, optionally after removing the trace.
pub fn singular_values(m: MatRef<'_, C64>, traceless: bool) -> Result<SingularSpectrum> {
    check_input(m, traceless)?;
    let shifted;
    let target = if traceless {
        shifted = make_traceless(m);
        shifted.as_ref()
    } else {
        m
    };
    if target.nrows() == 0 || target.ncols() == 0 {
        return Ok(SingularSpectrum { values: Vec::new(), traceless });
    }
    let mut values = target.singular_values().map_err(|e| spectral_error(target, format!("svd: {e:?}")))?;
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(SingularSpectrum { values, traceless })
}

pub fn singular_values_real(m: MatRef<'_, f64>, traceless: bool) -> Result<SingularSpectrum> {
    let mc = complexify(m);
    check_input(mc.as_ref(), traceless)?;
    let shifted;
    let target = if traceless {
        shifted = make_traceless_real(m);
        shifted.as_ref()
    } else {
        m
    };
    if target.nrows() == 0 || target.ncols() == 0 {
        return Ok(SingularSpectrum { values: Vec::new(), traceless });
    }
    let mut values = target.singular_values().map_err(|e| spectral_error(mc.as_ref(), format!("svd: {e:?}")))?;
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(SingularSpectrum { values, traceless })
}

pub fn complexify(m: MatRef<'_, f64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0))
}
