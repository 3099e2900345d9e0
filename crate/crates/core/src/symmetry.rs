//! Symmetry sectors of the Hilbert and Liouville spaces.
//!
//! A sector fixes some of the U(1) charges (the magnetization `m` on the
//! Hilbert space, `(m_p, m_d)` on the Liouville ladder) and optionally the
//! parities under the reflection `P_x` and global spin inversion. Sector basis
//! vectors are normalized orbit sums `Σ_g χ(g) |g s⟩ / √|orbit|`; the smallest
//! flattened index of each orbit is its representative and carries a `+`
//! coefficient.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::liouville::LiouvilleIndex;
use crate::pauli_ops::SpinBasisIndex;
use crate::sparse::CsrMatrix;
use crate::C64;

/// Ambient space a sector lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "space", content = "L", rename_all = "snake_case")]
pub enum Space {
    Hilbert(usize),
    Liouville(usize),
}

impl Space {
    pub fn sites(self) -> usize {
        match self {
            Space::Hilbert(l) | Space::Liouville(l) => l,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Space::Hilbert(l) => 1 << l,
            Space::Liouville(l) => 1 << (2 * l),
        }
    }

    fn reflect(self, state: usize) -> usize {
        match self {
            Space::Hilbert(l) => SpinBasisIndex(state).reflect(l).0,
            Space::Liouville(l) => LiouvilleIndex::from_flat(state, l).reflect(l).flat(l),
        }
    }

    fn invert(self, state: usize) -> usize {
        match self {
            Space::Hilbert(l) => SpinBasisIndex(state).invert(l).0,
            Space::Liouville(l) => {
                let idx = LiouvilleIndex::from_flat(state, l);
                LiouvilleIndex { ket: idx.ket.invert(l), bra: idx.bra.invert(l) }.flat(l)
            }
        }
    }

    /// `(m, m_p, m_d)` of a basis state; entries not defined for the space are 0.
    fn charges(self, state: usize) -> Charges {
        match self {
            Space::Hilbert(l) => Charges { m: SpinBasisIndex(state).magnetization(l), m_p: 0, m_d: 0 },
            Space::Liouville(l) => {
                let idx = LiouvilleIndex::from_flat(state, l);
                Charges { m: 0, m_p: idx.m_p(l), m_d: idx.m_d(l) }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Charges {
    m: i32,
    m_p: i32,
    m_d: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Quantum numbers selecting a sector. `None` means unresolved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorLabel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_p: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_d: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub px: Option<Parity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inversion: Option<Parity>,
}

impl SectorLabel {
    pub fn full() -> Self {
        Self::default()
    }

    pub fn with_m(mut self, m: i32) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_m_p(mut self, m_p: i32) -> Self {
        self.m_p = Some(m_p);
        self
    }

    pub fn with_m_d(mut self, m_d: i32) -> Self {
        self.m_d = Some(m_d);
        self
    }

    pub fn with_px(mut self, px: Parity) -> Self {
        self.px = Some(px);
        self
    }

    pub fn with_inversion(mut self, p: Parity) -> Self {
        self.inversion = Some(p);
        self
    }

    /// Whether spin inversion maps the charge constraints onto themselves.
    pub fn is_inversion_self_mapped(&self) -> bool {
        [self.m, self.m_p, self.m_d].iter().all(|c| c.is_none_or(|v| v == 0))
    }

    pub fn validate(&self, space: Space) -> Result<()> {
        let l = space.sites() as i32;
        match space {
            Space::Hilbert(_) => {
                if self.m_p.is_some() || self.m_d.is_some() {
                    return Err(invalid("m_p/m_d label a Liouville-space sector, not a Hilbert-space one"));
                }
                if let Some(m) = self.m {
                    if m.abs() > l || (m - l).rem_euclid(2) != 0 {
                        return Err(invalid(format!("magnetization {m} impossible for L = {l}")));
                    }
                }
            }
            Space::Liouville(_) => {
                if self.m.is_some() {
                    return Err(invalid("m labels a Hilbert-space sector; use m_p/m_d on Liouville space"));
                }
                if let (Some(p), Some(d)) = (self.m_p, self.m_d) {
                    if (p - d).rem_euclid(2) != 0 {
                        return Err(invalid(format!("m_p = {p} and m_d = {d} must be both even or both odd")));
                    }
                    if d.abs() > 2 * l - p.abs() {
                        return Err(invalid(format!("|m_d| = {} exceeds 2L - |m_p| = {}", d.abs(), 2 * l - p.abs())));
                    }
                }
                for (name, v) in [("m_p", self.m_p), ("m_d", self.m_d)] {
                    if let Some(v) = v {
                        if v.abs() > 2 * l || v.rem_euclid(2) != 0 {
                            return Err(invalid(format!("{name} = {v} impossible for L = {l}")));
                        }
                    }
                }
            }
        }
        if self.inversion.is_some() && !self.is_inversion_self_mapped() {
            return Err(invalid("spin inversion is resolvable only in sectors it maps onto themselves"));
        }
        Ok(())
    }

    fn admits(&self, c: Charges) -> bool {
        self.m.is_none_or(|m| m == c.m) && self.m_p.is_none_or(|v| v == c.m_p) && self.m_d.is_none_or(|v| v == c.m_d)
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(m) = self.m {
            parts.push(format!("m={m}"));
        }
        if let Some(v) = self.m_p {
            parts.push(format!("m_p={v}"));
        }
        if let Some(v) = self.m_d {
            parts.push(format!("m_d={v}"));
        }
        let name = |p: Parity| match p {
            Parity::Even => "even",
            Parity::Odd => "odd",
        };
        if let Some(p) = self.px {
            parts.push(format!("px={}", name(p)));
        }
        if let Some(p) = self.inversion {
            parts.push(format!("inversion={}", name(p)));
        }
        if parts.is_empty() {
            write!(f, "full")
        } else {
            write!(f, "{}", parts.join(","))
        }
    }
}

/// How [`enumerate_sectors`] treats one charge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ChargeConstraint {
    #[default]
    Ignore,
    /// Every occurring value becomes its own sector.
    Resolve,
    Fixed(i32),
}

/// Which symmetries to resolve when enumerating sectors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SectorQuery {
    pub m: ChargeConstraint,
    pub m_p: ChargeConstraint,
    pub m_d: ChargeConstraint,
    pub px: bool,
    /// Resolved only in sectors that inversion maps onto themselves.
    pub inversion: bool,
}

/// Exhaustive, disjoint list of non-empty sectors satisfying the query, with
/// their dimensions. Contradictory constraints give an empty list.
pub fn enumerate_sectors(space: Space, query: &SectorQuery) -> Vec<(SectorLabel, usize)> {
    let pick = |c: ChargeConstraint, v: i32| match c {
        ChargeConstraint::Ignore => Some(None),
        ChargeConstraint::Resolve => Some(Some(v)),
        ChargeConstraint::Fixed(f) => (f == v).then_some(Some(f)),
    };
    let mut charge_labels: Vec<SectorLabel> = Vec::new();
    for s in 0..space.dim() {
        let c = space.charges(s);
        let (m, m_p, m_d) = match space {
            Space::Hilbert(_) => (pick(query.m, c.m), Some(None), Some(None)),
            Space::Liouville(_) => (Some(None), pick(query.m_p, c.m_p), pick(query.m_d, c.m_d)),
        };
        if let (Some(m), Some(m_p), Some(m_d)) = (m, m_p, m_d) {
            let label = SectorLabel { m, m_p, m_d, px: None, inversion: None };
            if !charge_labels.contains(&label) {
                charge_labels.push(label);
            }
        }
    }
    charge_labels.sort_by_key(|l| (std::cmp::Reverse(l.m), std::cmp::Reverse(l.m_p), std::cmp::Reverse(l.m_d)));
    let px_options: Vec<Option<Parity>> =
        if query.px { vec![Some(Parity::Even), Some(Parity::Odd)] } else { vec![None] };
    let mut out = Vec::new();
    for base in charge_labels {
        let inv_options: Vec<Option<Parity>> = if query.inversion && base.is_inversion_self_mapped() {
            vec![Some(Parity::Even), Some(Parity::Odd)]
        } else {
            vec![None]
        };
        for &px in &px_options {
            for &inversion in &inv_options {
                let label = SectorLabel { px, inversion, ..base };
                let dim = SectorBasis::new(space, label).map(|b| b.dim()).unwrap_or(0);
                if dim > 0 {
                    out.push((label, dim));
                }
            }
        }
    }
    out
}

const NOT_IN_SECTOR: u32 = u32::MAX;

/// Orthonormal basis of one sector, each vector a signed orbit sum of
/// computational basis states.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    space: Space,
    label: SectorLabel,
    /// Orbit members and real coefficients; element 0 is the representative.
    vectors: Vec<Vec<(usize, f64)>>,
    /// Ambient state -> index into `vectors`.
    lookup: Vec<u32>,
}

impl SectorBasis {
    pub fn new(space: Space, label: SectorLabel) -> Result<Self> {
        label.validate(space)?;
        // group elements as (apply reflect?, apply invert?, character)
        let mut group: Vec<(bool, bool, f64)> = vec![(false, false, 1.0)];
        if let Some(p) = label.px {
            group.push((true, false, p.sign()));
        }
        if let Some(q) = label.inversion {
            let extra: Vec<_> = group.iter().map(|&(r, _, chi)| (r, true, chi * q.sign())).collect();
            group.extend(extra);
        }
        let act = |s: usize, (r, i, _): (bool, bool, f64)| {
            let s = if r { space.reflect(s) } else { s };
            if i {
                space.invert(s)
            } else {
                s
            }
        };

        let dim = space.dim();
        let mut lookup = vec![NOT_IN_SECTOR; dim];
        let mut visited = vec![false; dim];
        let mut vectors = Vec::new();
        for s in 0..dim {
            if visited[s] || !label.admits(space.charges(s)) {
                continue;
            }
            let mut members: Vec<(usize, f64)> = Vec::with_capacity(group.len());
            let mut null = false;
            for &g in &group {
                let t = act(s, g);
                visited[t] = true;
                if t == s && g.2 < 0.0 {
                    null = true;
                }
                if !members.iter().any(|&(u, _)| u == t) {
                    members.push((t, g.2));
                }
            }
            if null {
                continue;
            }
            let norm = 1.0 / (members.len() as f64).sqrt();
            for (t, c) in members.iter_mut() {
                *c *= norm;
                lookup[*t] = vectors.len() as u32;
            }
            vectors.push(members);
        }
        Ok(Self { space, label, vectors, lookup })
    }

    /// The whole space with the identity basis.
    pub fn full(space: Space) -> Self {
        Self::new(space, SectorLabel::full()).expect("unconstrained label is always valid")
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn label(&self) -> &SectorLabel {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Members of basis vector `k` with their coefficients.
    pub fn vector(&self, k: usize) -> &[(usize, f64)] {
        &self.vectors[k]
    }

    /// Orbit representatives in basis order.
    pub fn representatives(&self) -> impl Iterator<Item = usize> + '_ {
        self.vectors.iter().map(|v| v[0].0)
    }

    /// `(basis index, coefficient)` of an ambient state, if it lies in the sector.
    pub fn locate(&self, state: usize) -> Option<(usize, f64)> {
        let k = *self.lookup.get(state)?;
        if k == NOT_IN_SECTOR {
            return None;
        }
        let k = k as usize;
        self.vectors[k].iter().find(|&&(t, _)| t == state).map(|&(_, c)| (k, c))
    }

    /// The isometry `B` (ambient dim × sector dim) as a sparse matrix.
    pub fn isometry(&self) -> CsrMatrix {
        let triplets = self
            .vectors
            .iter()
            .enumerate()
            .flat_map(|(k, v)| v.iter().map(move |&(s, c)| (s, k, C64::new(c, 0.0))))
            .collect();
        CsrMatrix::from_triplets(self.space.dim(), self.dim(), triplets)
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == self.space.dim() && self.label == SectorLabel::full()
    }
}

/// An operator restricted to a sector, together with its basis.
#[derive(Clone, Debug)]
pub struct SectorBlock {
    pub matrix: CsrMatrix,
    pub basis: Arc<SectorBasis>,
    /// `‖op·B − B·block‖_F / ‖op‖_F` measured during projection.
    pub residual: f64,
}

/// Superoperator blocks use the same representation.
pub type SuperoperatorBlock = SectorBlock;

impl SectorBlock {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn label(&self) -> &SectorLabel {
        self.basis.label()
    }
}

/// Relative residual above which a projection is rejected.
pub const PROJECTION_TOL: f64 = 1e-11;

/// `B† op B`, verified to be an exact restriction: the operator must map the
/// sector into itself.
pub fn project(op: &CsrMatrix, basis: &Arc<SectorBasis>) -> Result<SectorBlock> {
    let ambient = basis.space().dim();
    if op.nrows() != ambient || op.ncols() != ambient {
        return Err(Error::DimensionMismatch { expected: ambient, found: op.nrows() });
    }
    let columns = op.transpose();
    let norm = op.frobenius_norm();
    let mut scratch = vec![C64::new(0.0, 0.0); ambient];
    let mut touched: Vec<usize> = Vec::new();
    let mut triplets = Vec::new();
    let mut residual_sq = 0.0;
    let mut charge_leak_sq = 0.0;
    for j in 0..basis.dim() {
        // y = op · b_j
        for &(s, c) in basis.vector(j) {
            for (r, v) in columns.row(s) {
                if scratch[r] == C64::new(0.0, 0.0) {
                    touched.push(r);
                }
                scratch[r] += v * c;
            }
        }
        touched.sort_unstable();
        touched.dedup();
        let mut ks: Vec<usize> = Vec::new();
        for &r in &touched {
            match basis.locate(r) {
                Some((k, _)) => ks.push(k),
                None => {
                    let leak = scratch[r].norm_sqr();
                    residual_sq += leak;
                    if !basis.label().admits(basis.space().charges(r)) {
                        charge_leak_sq += leak;
                    }
                }
            }
        }
        ks.sort_unstable();
        ks.dedup();
        for &k in &ks {
            let value: C64 = basis.vector(k).iter().map(|&(t, c)| scratch[t] * c).sum();
            for &(t, c) in basis.vector(k) {
                residual_sq += (scratch[t] - value * c).norm_sqr();
            }
            if value != C64::new(0.0, 0.0) {
                triplets.push((k, j, value));
            }
        }
        for &r in &touched {
            scratch[r] = C64::new(0.0, 0.0);
        }
        touched.clear();
    }
    let residual = if norm > 0.0 { residual_sq.sqrt() / norm } else { 0.0 };
    if residual > PROJECTION_TOL {
        let label = basis.label();
        let symmetry = if norm > 0.0 && charge_leak_sq.sqrt() / norm > PROJECTION_TOL {
            match basis.space() {
                Space::Hilbert(_) => "U(1) magnetization (m)".to_string(),
                Space::Liouville(_) => "U(1) ladder charge (m_p/m_d)".to_string(),
            }
        } else {
            let mut names = Vec::new();
            if label.px.is_some() {
                names.push("P_x reflection");
            }
            if label.inversion.is_some() {
                names.push("spin inversion");
            }
            names.join(" / ")
        };
        return Err(Error::SymmetryViolation { symmetry, residual });
    }
    let dim = basis.dim();
    Ok(SectorBlock { matrix: CsrMatrix::from_triplets(dim, dim, triplets), basis: Arc::clone(basis), residual })
}
