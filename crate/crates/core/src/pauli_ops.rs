//! Pauli-string algebra on the `2^L` dimensional spin-1/2 Hilbert space.
//!
//! Basis states are bitmasks: site 1 is the most significant of the `L` bits
//! and a set bit means spin up (`σ^z = +1`). Matrix row and column indices are
//! the bitmask values themselves.

use std::fmt;
use std::str::FromStr;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sparse::CsrMatrix;
use crate::C64;

/// Longest chain the bitmask representation is used for.
pub const MAX_SITES: usize = 30;

/// Computational basis state of an `L`-site chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpinBasisIndex(pub usize);

impl SpinBasisIndex {
    /// Builds a state from per-site spins listed from site 1 to site L,
    /// `true` meaning up.
    pub fn from_spins(spins: &[bool]) -> Self {
        Self(spins.iter().fold(0, |acc, &up| (acc << 1) | usize::from(up)))
    }

    /// Bit position holding `site` (1-based).
    #[inline]
    pub fn bit_of(site: usize, sites: usize) -> usize {
        sites - site
    }

    #[inline]
    pub fn is_up(self, site: usize, sites: usize) -> bool {
        self.0 >> Self::bit_of(site, sites) & 1 == 1
    }

    pub fn up_count(self) -> u32 {
        self.0.count_ones()
    }

    /// Eigenvalue of `Σ_i σ^z_i`.
    #[inline]
    pub fn magnetization(self, sites: usize) -> i32 {
        2 * self.0.count_ones() as i32 - sites as i32
    }

    /// Site order reversed (`i -> L + 1 - i`).
    #[inline]
    pub fn reflect(self, sites: usize) -> Self {
        if sites == 0 {
            return self;
        }
        Self(self.0.reverse_bits() >> (usize::BITS as usize - sites))
    }

    /// Every spin flipped.
    #[inline]
    pub fn invert(self, sites: usize) -> Self {
        Self(self.0 ^ ((1usize << sites) - 1))
    }
}

impl fmt::Display for SpinBasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:b}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
    /// `σ^+ = (σ^x + iσ^y)/2`, maps down to up.
    Plus,
    /// `σ^- = (σ^x - iσ^y)/2`, maps up to down.
    Minus,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            "+" | "plus" => Ok(Axis::Plus),
            "-" | "−" | "minus" => Ok(Axis::Minus),
            other => Err(invalid(format!("unknown Pauli axis {other:?}"))),
        }
    }
}

/// Single-site matrix in the `{up, down}` ordering: row/column 0 is up.
pub fn pauli_matrix(axis: Axis) -> [[C64; 2]; 2] {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match axis {
        Axis::X => [[o, one], [one, o]],
        Axis::Y => [[o, -i], [i, o]],
        Axis::Z => [[one, o], [o, -one]],
        Axis::Plus => [[o, one], [o, o]],
        Axis::Minus => [[o, o], [one, o]],
    }
}

/// `coefficient · Π σ^{axis}_{site}` over distinct sites.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coefficient: C64,
    pub factors: Vec<(usize, Axis)>,
}

impl PauliTerm {
    pub fn new(coefficient: C64, factors: Vec<(usize, Axis)>) -> Self {
        Self { coefficient, factors }
    }

    pub fn real(coefficient: f64, factors: Vec<(usize, Axis)>) -> Self {
        Self::new(C64::new(coefficient, 0.0), factors)
    }

    pub fn validate(&self, sites: usize) -> Result<()> {
        if sites > MAX_SITES {
            return Err(invalid(format!("chain length {sites} exceeds {MAX_SITES}")));
        }
        for (k, &(site, _)) in self.factors.iter().enumerate() {
            if site == 0 || site > sites {
                return Err(invalid(format!("site {site} out of range 1..={sites}")));
            }
            if self.factors[..k].iter().any(|&(s, _)| s == site) {
                return Err(invalid(format!("site {site} repeated within one Pauli term")));
            }
        }
        Ok(())
    }

    /// Image of a basis state: `Some((target, amplitude))`, or `None` when the
    /// term annihilates it. Pauli strings are monomial, so there is at most
    /// one target.
    pub fn apply(&self, state: SpinBasisIndex, sites: usize) -> Option<(SpinBasisIndex, C64)> {
        let mut bits = state.0;
        let mut amp = self.coefficient;
        for &(site, axis) in &self.factors {
            let bit = SpinBasisIndex::bit_of(site, sites);
            let local_in = if bits >> bit & 1 == 1 { 0 } else { 1 };
            let m = pauli_matrix(axis);
            let (local_out, a) = (0..2).map(|r| (r, m[r][local_in])).find(|(_, a)| a.norm() != 0.0)?;
            amp *= a;
            if local_out == 0 {
                bits |= 1 << bit;
            } else {
                bits &= !(1 << bit);
            }
        }
        Some((SpinBasisIndex(bits), amp))
    }

    /// True if every factor is diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        self.factors.iter().all(|&(_, a)| a == Axis::Z)
    }

    fn triplets(&self, sites: usize) -> Vec<(usize, usize, C64)> {
        (0..1usize << sites)
            .filter_map(|col| {
                self.apply(SpinBasisIndex(col), sites).map(|(row, amp)| (row.0, col, amp))
            })
            .collect()
    }
}

/// An operator on the full `2^L` spin Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    sites: usize,
    matrix: CsrMatrix,
}

impl OperatorMatrix {
    pub fn new(sites: usize, matrix: CsrMatrix) -> Result<Self> {
        let dim = 1usize << sites;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        Ok(Self { sites, matrix })
    }

    pub fn zeros(sites: usize) -> Self {
        let dim = 1usize << sites;
        Self { sites, matrix: CsrMatrix::zeros(dim, dim) }
    }

    pub fn identity(sites: usize) -> Self {
        Self { sites, matrix: CsrMatrix::identity(1 << sites) }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CsrMatrix {
        self.matrix
    }

    pub fn basis(&self) -> impl Iterator<Item = SpinBasisIndex> {
        (0..self.dim()).map(SpinBasisIndex)
    }

    pub fn to_dense(&self) -> Mat<C64> {
        self.matrix.to_dense()
    }

    pub fn get(&self, row: SpinBasisIndex, col: SpinBasisIndex) -> C64 {
        self.matrix.get(row.0, col.0)
    }

    pub fn adjoint(&self) -> Self {
        Self { sites: self.sites, matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { sites: self.sites, matrix: self.matrix.scale(factor) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self { sites: self.sites, matrix: self.matrix.add(&other.matrix)? })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self { sites: self.sites, matrix: self.matrix.sub(&other.matrix)? })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        Ok(Self { sites: self.sites, matrix: self.matrix.matmul(&other.matrix)? })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(Self { sites: self.sites, matrix: self.matrix.commutator(&other.matrix)? })
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }
}

/// Embeds a single Pauli term into the full space.
pub fn embed_term(term: &PauliTerm, sites: usize) -> Result<OperatorMatrix> {
    term.validate(sites)?;
    let dim = 1usize << sites;
    OperatorMatrix::new(sites, CsrMatrix::from_triplets(dim, dim, term.triplets(sites)))
}

/// Matrix elements `⟨a|term|b⟩` between the listed basis states only.
pub fn embed_term_in_basis(term: &PauliTerm, sites: usize, states: &[SpinBasisIndex]) -> Result<CsrMatrix> {
    term.validate(sites)?;
    let position: std::collections::HashMap<usize, usize> =
        states.iter().enumerate().map(|(k, s)| (s.0, k)).collect();
    let triplets = states
        .iter()
        .enumerate()
        .filter_map(|(col, &s)| {
            let (target, amp) = term.apply(s, sites)?;
            position.get(&target.0).map(|&row| (row, col, amp))
        })
        .collect();
    Ok(CsrMatrix::from_triplets(states.len(), states.len(), triplets))
}

/// Sum of embedded terms. Terms are expanded in parallel and the entries are
/// accumulated in term order, so the result does not depend on scheduling.
pub fn assemble(terms: &[PauliTerm], sites: usize) -> Result<OperatorMatrix> {
    if terms.is_empty() {
        return Err(invalid("cannot assemble an empty term list"));
    }
    for t in terms {
        t.validate(sites)?;
    }
    let dim = 1usize << sites;
    let parts: Vec<Vec<(usize, usize, C64)>> = terms.par_iter().map(|t| t.triplets(sites)).collect();
    let triplets = parts.into_iter().flatten().collect();
    OperatorMatrix::new(sites, CsrMatrix::from_triplets(dim, dim, triplets))
}

/// `Σ_i σ^z_i`, diagonal with entries `2·popcount − L`.
pub fn total_sz(sites: usize) -> OperatorMatrix {
    let diag: Vec<C64> =
        (0..1usize << sites).map(|b| C64::new(SpinBasisIndex(b).magnetization(sites) as f64, 0.0)).collect();
    OperatorMatrix { sites, matrix: CsrMatrix::from_diagonal(&diag) }
}

/// `Π_i σ^x_i`.
pub fn global_flip(sites: usize) -> OperatorMatrix {
    let dim = 1usize << sites;
    let triplets = (0..dim).map(|b| (SpinBasisIndex(b).invert(sites).0, b, C64::new(1.0, 0.0))).collect();
    OperatorMatrix { sites, matrix: CsrMatrix::from_triplets(dim, dim, triplets) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn st(spins: &str) -> SpinBasisIndex {
        SpinBasisIndex::from_spins(&spins.chars().map(|ch| ch == 'u').collect::<Vec<_>>())
    }

    #[test]
    fn pauli_z_and_x_and_lowering() {
        let z = pauli_matrix(Axis::Z);
        assert_eq!((z[0][0], z[1][1], z[0][1], z[1][0]), (c(1.0), c(-1.0), c(0.0), c(0.0)));
        // up = column 0
        let x = pauli_matrix(Axis::X);
        assert_eq!((x[0][0], x[1][0]), (c(0.0), c(1.0)));
        let m = pauli_matrix(Axis::Minus);
        assert_eq!((m[0][0], m[1][0]), (c(0.0), c(1.0)));
        assert_eq!((m[0][1], m[1][1]), (c(0.0), c(0.0)));
    }

    #[test]
    fn unknown_axis_rejected() {
        assert!("w".parse::<Axis>().is_err());
        assert_eq!("-".parse::<Axis>().unwrap(), Axis::Minus);
    }

    #[test]
    fn embed_z_on_first_and_second_site() {
        // listed in the order ↑↑, ↑↓, ↓↑, ↓↓
        let order = ["uu", "ud", "du", "dd"];
        let z1 = embed_term(&PauliTerm::real(1.0, vec![(1, Axis::Z)]), 2).unwrap();
        let z2 = embed_term(&PauliTerm::real(1.0, vec![(2, Axis::Z)]), 2).unwrap();
        let d1: Vec<f64> = order.iter().map(|s| z1.get(st(s), st(s)).re).collect();
        let d2: Vec<f64> = order.iter().map(|s| z2.get(st(s), st(s)).re).collect();
        assert_eq!(d1, vec![1.0, 1.0, -1.0, -1.0]);
        assert_eq!(d2, vec![1.0, -1.0, 1.0, -1.0]);
        assert_eq!(z1.matrix().nnz(), 4);
    }

    #[test]
    fn embed_scaled_lowering_single_site() {
        let g: f64 = 2.5;
        let m = embed_term(&PauliTerm::real(g.sqrt(), vec![(1, Axis::Minus)]), 1).unwrap();
        assert_eq!(m.matrix().nnz(), 1);
        assert_eq!(m.get(st("d"), st("u")), c(g.sqrt()));
    }

    #[test]
    fn site_out_of_range_rejected() {
        assert!(embed_term(&PauliTerm::real(1.0, vec![(3, Axis::Z)]), 2).is_err());
        assert!(embed_term(&PauliTerm::real(1.0, vec![(0, Axis::Z)]), 2).is_err());
        assert!(embed_term(&PauliTerm::real(1.0, vec![(1, Axis::Z), (1, Axis::X)]), 2).is_err());
    }

    #[test]
    fn assemble_sums_and_cancels() {
        let sum = assemble(&[PauliTerm::real(1.0, vec![(1, Axis::Z)]), PauliTerm::real(1.0, vec![(2, Axis::Z)])], 2)
            .unwrap();
        let d: Vec<f64> = ["uu", "ud", "du", "dd"].iter().map(|s| sum.get(st(s), st(s)).re).collect();
        assert_eq!(d, vec![2.0, 0.0, 0.0, -2.0]);
        let zero = assemble(&[PauliTerm::real(1.0, vec![(1, Axis::X)]), PauliTerm::real(-1.0, vec![(1, Axis::X)])], 1)
            .unwrap();
        assert_eq!(zero.matrix().nnz(), 0);
        assert!(assemble(&[], 2).is_err());
    }

    #[test]
    fn heisenberg_bond_spectrum() {
        let bond: Vec<PauliTerm> =
            [Axis::X, Axis::Y, Axis::Z].iter().map(|&a| PauliTerm::real(1.0, vec![(1, a), (2, a)])).collect();
        let h = assemble(&bond, 2).unwrap();
        let ev = crate::spectral_core::hermitian_eigenvalues(h.matrix()).unwrap();
        let expected = [-3.0, 1.0, 1.0, 1.0];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn y_string_matches_dense_kron() {
        // σ^y ⊗ σ^+ built literally in kron order (index 0 = all up) and
        // compared after mapping kron index r to bitmask !r.
        let y = pauli_matrix(Axis::Y);
        let p = pauli_matrix(Axis::Plus);
        let m = embed_term(&PauliTerm::real(1.0, vec![(1, Axis::Y), (2, Axis::Plus)]), 2).unwrap();
        for r in 0..4usize {
            for s in 0..4usize {
                let kron = y[r >> 1][s >> 1] * p[r & 1][s & 1];
                assert_eq!(m.matrix().get(3 - r, 3 - s), kron);
            }
        }
    }

    #[test]
    fn reflect_and_invert() {
        assert_eq!(st("uud").reflect(3), st("duu"));
        assert_eq!(st("uud").invert(3), st("ddu"));
        assert_eq!(st("ud").magnetization(2), 0);
        assert_eq!(st("uuu").magnetization(3), 3);
    }
}
