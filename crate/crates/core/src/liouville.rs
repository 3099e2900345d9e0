//! Liouville-space (ladder) representation of the Lindbladian.
//!
//! A density matrix `ρ = Σ ρ_{mn} |m⟩⟨n|` is vectorized ket-major: the pair
//! `(m, n)` has flat index `m·2^L + n`. With this convention
//! `vec(A ρ B) = (A ⊗ Bᵀ) vec(ρ)`, so
//!
//! ```text
//! 𝕃 = −i(H_eff ⊗ 𝕀 − 𝕀 ⊗ H_eff*) + Σ_i L_i ⊗ L_i*
//! ```
//!
//! where the first term is the no-jump part and the sum the recycling part.

use std::sync::Arc;

use faer::Mat;

use crate::error::{invalid, Error, Result};
use crate::models::{JumpKind, JumpSet};
use crate::pauli_ops::{OperatorMatrix, SpinBasisIndex};
use crate::spectral_core::{hermitian_eigenvalues, sparse_eigenvalues, ComplexSpectrum};
use crate::sparse::CsrMatrix;
use crate::symmetry::{project, SectorBasis, SectorBlock, SectorLabel, Space};
use crate::C64;

/// A `(ket, bra)` pair of the ladder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LiouvilleIndex {
    pub ket: SpinBasisIndex,
    pub bra: SpinBasisIndex,
}

impl LiouvilleIndex {
    #[inline]
    pub fn from_flat(flat: usize, sites: usize) -> Self {
        Self { ket: SpinBasisIndex(flat >> sites), bra: SpinBasisIndex(flat & ((1 << sites) - 1)) }
    }

    #[inline]
    pub fn flat(self, sites: usize) -> usize {
        (self.ket.0 << sites) | self.bra.0
    }

    /// `m_ket + m_bra`
    #[inline]
    pub fn m_p(self, sites: usize) -> i32 {
        self.ket.magnetization(sites) + self.bra.magnetization(sites)
    }

    /// `m_ket − m_bra`
    #[inline]
    pub fn m_d(self, sites: usize) -> i32 {
        self.ket.magnetization(sites) - self.bra.magnetization(sites)
    }

    /// `P_x`: both legs reflected along the chain.
    #[inline]
    pub fn reflect(self, sites: usize) -> Self {
        Self { ket: self.ket.reflect(sites), bra: self.bra.reflect(sites) }
    }

    /// `P_y`: the legs exchanged, `|m, n⟩⟩ -> |n, m⟩⟩`.
    #[inline]
    pub fn swap_legs(self) -> Self {
        Self { ket: self.bra, bra: self.ket }
    }
}

/// The two summands of `𝕃` and their sum, on the full Liouville space.
#[derive(Clone, Debug)]
pub struct Lindbladian {
    sites: usize,
    kind: JumpKind,
    no_jump: CsrMatrix,
    recycling: CsrMatrix,
    full: CsrMatrix,
}

impl Lindbladian {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn jump_kind(&self) -> JumpKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.full.nrows()
    }

    /// `−i(H_eff ⊗ 𝕀 − 𝕀 ⊗ H_eff*)`
    pub fn no_jump(&self) -> &CsrMatrix {
        &self.no_jump
    }

    /// `Σ_i L_i ⊗ L_i*`
    pub fn recycling(&self) -> &CsrMatrix {
        &self.recycling
    }

    pub fn full(&self) -> &CsrMatrix {
        &self.full
    }

    /// The unprojected Lindbladian as a block over the trivial sector.
    pub fn as_block(&self) -> SectorBlock {
        SectorBlock {
            matrix: self.full.clone(),
            basis: Arc::new(SectorBasis::full(Space::Liouville(self.sites))),
            residual: 0.0,
        }
    }

    /// Restriction to a symmetry sector, verified by [`project`].
    pub fn sector(&self, label: SectorLabel) -> Result<SectorBlock> {
        let basis = Arc::new(SectorBasis::new(Space::Liouville(self.sites), label)?);
        project(&self.full, &basis)
    }

    /// `‖t·𝕃‖_∞` with `t` the row vector of the vectorized identity.
    pub fn trace_defect(&self) -> f64 {
        let row = identity_row(self.sites);
        self.full.vecmat(&row).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Vectorized identity `Σ_m ⟨⟨m, m|` as a dense row.
pub fn identity_row(sites: usize) -> Vec<C64> {
    let d = 1usize << sites;
    let mut row = vec![C64::new(0.0, 0.0); d * d];
    for m in 0..d {
        row[m * d + m] = C64::new(1.0, 0.0);
    }
    row
}

pub fn build_lindbladian(heff: &OperatorMatrix, jumps: &JumpSet) -> Result<Lindbladian> {
    let sites = heff.sites();
    for l in &jumps.operators {
        if l.dim() != heff.dim() {
            return Err(Error::DimensionMismatch { expected: heff.dim(), found: l.dim() });
        }
    }
    let id = CsrMatrix::identity(heff.dim());
    let h = heff.matrix();
    let no_jump = h.kron(&id).scale(C64::new(0.0, -1.0)).add(&id.kron(&h.conj()).scale(C64::new(0.0, 1.0)))?;
    let dim = no_jump.nrows();
    let recycling = jumps
        .operators
        .iter()
        .try_fold(CsrMatrix::zeros(dim, dim), |acc, l| acc.add(&l.matrix().kron(&l.matrix().conj())))?;
    let full = no_jump.add(&recycling)?;
    Ok(Lindbladian { sites, kind: jumps.kind, no_jump, recycling, full })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChargeKind {
    /// `𝓜_p`, total magnetization of both legs.
    Total,
    /// `𝓜_d`, magnetization difference between the legs.
    Difference,
}

/// Diagonal charge operator on Liouville space.
pub fn charge_operator(kind: ChargeKind, sites: usize) -> CsrMatrix {
    let diag: Vec<C64> = (0..1usize << (2 * sites))
        .map(|f| {
            let idx = LiouvilleIndex::from_flat(f, sites);
            let v = match kind {
                ChargeKind::Total => idx.m_p(sites),
                ChargeKind::Difference => idx.m_d(sites),
            };
            C64::new(v as f64, 0.0)
        })
        .collect();
    CsrMatrix::from_diagonal(&diag)
}

/// `P_x` as a permutation of flat Liouville indices.
pub fn ladder_reflection_px(sites: usize) -> Vec<usize> {
    (0..1usize << (2 * sites)).map(|f| LiouvilleIndex::from_flat(f, sites).reflect(sites).flat(sites)).collect()
}

/// `P_y` as a permutation of flat Liouville indices.
pub fn leg_exchange_py(sites: usize) -> Vec<usize> {
    (0..1usize << (2 * sites)).map(|f| LiouvilleIndex::from_flat(f, sites).swap_legs().flat(sites)).collect()
}

/// Matrix with `P[perm[i], i] = 1`.
pub fn permutation_matrix(perm: &[usize]) -> CsrMatrix {
    let n = perm.len();
    CsrMatrix::from_triplets(n, n, perm.iter().enumerate().map(|(i, &p)| (p, i, C64::new(1.0, 0.0))).collect())
}

/// A block written in the `P_y`-(anti)symmetric basis, where it is real.
#[derive(Clone, Debug)]
pub struct RealBlock {
    pub matrix: Mat<f64>,
    /// Columns are the real-basis vectors in the coordinates of the input block.
    pub transform: CsrMatrix,
    /// `max|Im| / max|entry|` before the imaginary parts were dropped.
    pub imaginary_ratio: f64,
}

/// Largest `max|Im| / max|entry|` accepted by [`py_real_basis`].
pub const REALITY_TOL: f64 = 1e-12;

/// Rewrites a `𝒯 = P_y K` closed block in the basis
/// `φ^sym = (|m,n⟩⟩ + P_y|m,n⟩⟩)/√2`, `φ^asym = i(|m,n⟩⟩ − P_y|m,n⟩⟩)/√2`.
pub fn py_real_basis(block: &SectorBlock) -> Result<RealBlock> {
    let basis = &block.basis;
    let sites = match basis.space() {
        Space::Liouville(l) => l,
        Space::Hilbert(_) => return Err(invalid("P_y acts on Liouville space only")),
    };
    if basis.label().m_d.is_some_and(|d| d != 0) {
        return Err(invalid(format!(
            "sector with m_d = {} is not closed under P_y K (it maps m_d to -m_d)",
            basis.label().m_d.unwrap_or_default()
        )));
    }
    let n = basis.dim();
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let i = C64::new(0.0, 1.0);
    let mut triplets = Vec::with_capacity(2 * n);
    let mut col = 0;
    for k in 0..n {
        let (rep, c_rep) = basis.vector(k)[0];
        let image = LiouvilleIndex::from_flat(rep, sites).swap_legs().flat(sites);
        let (kp, c_img) = basis
            .locate(image)
            .ok_or_else(|| invalid("sector basis is not closed under P_y"))?;
        let sign = c_img / c_rep;
        if kp == k {
            let v = if sign > 0.0 { C64::new(1.0, 0.0) } else { i };
            triplets.push((k, col, v));
            col += 1;
        } else if k < kp {
            triplets.push((k, col, C64::new(r2, 0.0)));
            triplets.push((kp, col, C64::new(sign * r2, 0.0)));
            triplets.push((k, col + 1, i * r2));
            triplets.push((kp, col + 1, -i * sign * r2));
            col += 2;
        }
    }
    debug_assert_eq!(col, n);
    let transform = CsrMatrix::from_triplets(n, n, triplets);
    let rotated = transform.adjoint().matmul(&block.matrix)?.matmul(&transform)?;
    let max_entry = rotated.max_abs();
    let max_imag = rotated.iter().map(|(_, _, v)| v.im.abs()).fold(0.0, f64::max);
    let imaginary_ratio = if max_entry > 0.0 { max_imag / max_entry } else { 0.0 };
    if imaginary_ratio > REALITY_TOL {
        return Err(invalid(format!("block is not real in the P_y basis (imaginary ratio {imaginary_ratio:.2e})")));
    }
    let mut matrix = Mat::<f64>::zeros(n, n);
    for (r, c, v) in rotated.iter() {
        matrix[(r, c)] = v.re;
    }
    Ok(RealBlock { matrix, transform, imaginary_ratio })
}

/// Direction in which the jumps move the ladder charge `q = m_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChargeStep {
    /// `σ^-` jumps: recycling maps `q -> q − 2`.
    Lowering,
    Raising,
}

/// The Lindbladian permuted into descending-`m_p` order with its block layout
/// and any entries that break the block-triangular structure.
#[derive(Clone, Debug)]
pub struct ChargeOrderedForm {
    /// `perm[flat] = position` in the ordered basis.
    pub permutation: Vec<usize>,
    /// `(m_p, start, end)` for each block, in order.
    pub blocks: Vec<(i32, usize, usize)>,
    pub matrix: CsrMatrix,
    /// Recycling entries `(row, col, value)` (ordered basis) outside the
    /// allowed `q -> q ∓ 2` blocks.
    pub recycling_violations: Vec<(usize, usize, C64)>,
    /// No-jump entries outside the diagonal blocks.
    pub no_jump_violations: Vec<(usize, usize, C64)>,
}

impl ChargeOrderedForm {
    pub fn is_block_triangular(&self) -> bool {
        self.recycling_violations.is_empty() && self.no_jump_violations.is_empty()
    }
}

/// Orders the Liouville basis by descending `m_p` and checks that the no-jump
/// part is block diagonal and the recycling part only connects `q` to the
/// adjacent lower (or upper, for raising jumps) charge.
///
/// Here `q` counts up spins on both legs, so `q -> q − 2` is a change of −4
/// in `m_p`.
pub fn charge_ordered_form(lind: &Lindbladian, step: ChargeStep) -> ChargeOrderedForm {
    let sites = lind.sites();
    let dim = lind.dim();
    let m_p = |f: usize| LiouvilleIndex::from_flat(f, sites).m_p(sites);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by_key(|&f| (std::cmp::Reverse(m_p(f)), f));
    let mut permutation = vec![0; dim];
    for (pos, &f) in order.iter().enumerate() {
        permutation[f] = pos;
    }
    let mut blocks: Vec<(i32, usize, usize)> = Vec::new();
    for (pos, &f) in order.iter().enumerate() {
        let q = m_p(f);
        match blocks.last_mut() {
            Some(last) if last.0 == q => last.2 = pos + 1,
            _ => blocks.push((q, pos, pos + 1)),
        }
    }
    // one spin flip on each leg: m_p changes by ±4 in σ^z units
    let allowed = match step {
        ChargeStep::Lowering => -4,
        ChargeStep::Raising => 4,
    };
    let recycling_violations = lind
        .recycling()
        .iter()
        .filter(|&(r, c, _)| m_p(r) - m_p(c) != allowed)
        .map(|(r, c, v)| (permutation[r], permutation[c], v))
        .collect();
    let no_jump_violations = lind
        .no_jump()
        .iter()
        .filter(|&(r, c, _)| m_p(r) != m_p(c))
        .map(|(r, c, v)| (permutation[r], permutation[c], v))
        .collect();
    ChargeOrderedForm {
        matrix: lind.full().permute(&permutation),
        permutation,
        blocks,
        recycling_violations,
        no_jump_violations,
    }
}

/// Eigenvalues of an operator that conserves `Σσ^z`, labelled by the
/// magnetization sector they came from. Fails if the operator mixes sectors.
pub fn eigenvalues_by_magnetization(op: &OperatorMatrix) -> Result<Vec<(C64, i32)>> {
    let sites = op.sites();
    let mut out = Vec::with_capacity(op.dim());
    for m in (-(sites as i32)..=sites as i32).rev().step_by(2) {
        let basis = Arc::new(SectorBasis::new(Space::Hilbert(sites), SectorLabel::full().with_m(m))?);
        let block = project(op.matrix(), &basis)?;
        out.extend(sparse_eigenvalues(&block.matrix)?.values.into_iter().map(|e| (e, m)));
    }
    Ok(out)
}

/// Hermitian variant of [`eigenvalues_by_magnetization`].
pub fn energies_by_magnetization(h: &OperatorMatrix) -> Result<Vec<(f64, i32)>> {
    let sites = h.sites();
    let mut out = Vec::with_capacity(h.dim());
    for m in (-(sites as i32)..=sites as i32).rev().step_by(2) {
        let basis = Arc::new(SectorBasis::new(Space::Hilbert(sites), SectorLabel::full().with_m(m))?);
        let block = project(h.matrix(), &basis).map_err(|e| match e {
            Error::SymmetryViolation { residual, .. } => {
                invalid(format!("Hamiltonian does not conserve the magnetization (residual {residual:.2e})"))
            }
            other => other,
        })?;
        out.extend(hermitian_eigenvalues(&block.matrix)?.into_iter().map(|e| (e, m)));
    }
    Ok(out)
}

/// `{λ_{μν} = −i(E_μ − E_ν*)}` over ordered pairs of `H_eff` eigenvalues,
/// optionally only pairs with `m_μ − m_ν = m_d`.
pub fn separable_spectrum(heff_eigs: &[(C64, i32)], m_d: Option<i32>) -> ComplexSpectrum {
    let minus_i = C64::new(0.0, -1.0);
    let mut values = Vec::new();
    for &(e_mu, m_mu) in heff_eigs {
        for &(e_nu, m_nu) in heff_eigs {
            if m_d.is_none_or(|d| m_mu - m_nu == d) {
                values.push(minus_i * (e_mu - e_nu.conj()));
            }
        }
    }
    ComplexSpectrum::from_values(values)
}

/// `λ^{(m_p)}_{αβ} = −i(E_α − E_β) − (γ/4)(m_p + 2L)` for a magnetization
/// conserving Hamiltonian under uniform damping `γ`, restricted to
/// `m_ket − m_bra = m_d` when given.
pub fn band_eigenvalues(energies: &[(f64, i32)], gamma: f64, sites: usize, m_d: Option<i32>) -> ComplexSpectrum {
    let mut values = Vec::new();
    for &(e_a, m_a) in energies {
        for &(e_b, m_b) in energies {
            if m_d.is_none_or(|d| m_a - m_b == d) {
                let m_p = (m_a + m_b) as f64;
                values.push(C64::new(-0.25 * gamma * (m_p + 2.0 * sites as f64), -(e_a - e_b)));
            }
        }
    }
    ComplexSpectrum::from_values(values)
}

/// Band prediction straight from the Hamiltonian; rejects non-conserving `H`.
pub fn uniform_damping_band_prediction(h: &OperatorMatrix, gamma: f64, m_d: Option<i32>) -> Result<ComplexSpectrum> {
    if !(gamma >= 0.0) {
        return Err(invalid(format!("negative damping rate {gamma}")));
    }
    let energies = energies_by_magnetization(h)?;
    Ok(band_eigenvalues(&energies, gamma, h.sites(), m_d))
}
