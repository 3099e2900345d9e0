//! Compressed sparse row storage for complex operators.
//!
//! Assembly goes through a coordinate list ([`CsrMatrix::from_triplets`]);
//! everything downstream reads the compressed form.

use faer::Mat;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    /// Builds the matrix from a coordinate list.
    ///
    /// Duplicate coordinates are summed in the order they appear in `triplets`,
    /// so the result is bitwise reproducible for a fixed input order. Entries
    /// that sum to exactly zero are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        debug_assert!(triplets.iter().all(|&(r, c, _)| r < nrows && c < ncols));
        // stable: preserves insertion order among duplicates
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut iter = triplets.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v != C64::new(0.0, 0.0) {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    /// Sparse copy of a dense matrix, keeping entries with modulus above `tol`.
    pub fn from_dense(m: &Mat<C64>, tol: f64) -> Self {
        let mut triplets = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v.norm() > tol {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), triplets)
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let range = self.indptr[i]..self.indptr[i + 1];
        match self.indices[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.iter().map(|(i, j, v)| (j, i, v)).collect())
    }

    pub fn conj(&self) -> Self {
        Self { values: self.values.iter().map(|v| v.conj()).collect(), ..self.clone() }
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn scale(&self, factor: C64) -> Self {
        let triplets = self.iter().map(|(i, j, v)| (i, j, v * factor)).collect();
        Self::from_triplets(self.nrows, self.ncols, triplets)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut triplets: Vec<_> = self.iter().collect();
        triplets.extend(other.iter());
        Ok(Self::from_triplets(self.nrows, self.ncols, triplets))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch { expected: self.ncols, found: other.nrows });
        }
        let mut triplets = Vec::new();
        for (i, k, a) in self.iter() {
            for (j, b) in other.row(k) {
                triplets.push((i, j, a * b));
            }
        }
        Ok(Self::from_triplets(self.nrows, other.ncols, triplets))
    }

    /// Kronecker product `self ⊗ other` with row-major composite indices
    /// `(i, k) -> i * other.nrows + k`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.iter() {
            for (k, l, b) in other.iter() {
                triplets.push((i * other.nrows + k, j * other.ncols + l, a * b));
            }
        }
        Self::from_triplets(self.nrows * other.nrows, self.ncols * other.ncols, triplets)
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension");
        (0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `x^T A`, i.e. the action of the matrix on a row vector.
    pub fn vecmat(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.nrows, "vecmat dimension");
        let mut out = vec![C64::new(0.0, 0.0); self.ncols];
        for (i, j, v) in self.iter() {
            out[j] += x[i] * v;
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Permutes rows and columns: entry `(i, j)` moves to `(perm[i], perm[j])`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert!(self.is_square() && perm.len() == self.nrows);
        let triplets = self.iter().map(|(i, j, v)| (perm[i], perm[j], v)).collect();
        Self::from_triplets(self.nrows, self.ncols, triplets)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Largest entrywise modulus of `A - A^†`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.nrows != other.nrows {
            return Err(Error::DimensionMismatch { expected: self.nrows, found: other.nrows });
        }
        if self.ncols != other.ncols {
            return Err(Error::DimensionMismatch { expected: self.ncols, found: other.ncols });
        }
        Ok(())
    }
}
