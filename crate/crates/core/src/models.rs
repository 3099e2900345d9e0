//! Spin-chain Hamiltonians, jump-operator families and the effective
//! non-Hermitian Hamiltonian `H_eff = H − (i/2) Σ L†L`.
//!
//! All chains have open boundaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pauli_ops::{assemble, embed_term, Axis, OperatorMatrix, PauliTerm};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Tfi,
    Xxz,
    NnnXxz,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpSpec {
    /// `L_i = √γ σ^-_i`
    DampingUniform { gamma: f64 },
    /// `L_i = √γ_i σ^-_i` with `γ_i` uniform on `[0, gamma_max]`.
    DampingDisordered { gamma_max: f64, seed: Option<u64> },
    /// `L_i = √γ σ^z_i`
    Dephasing { gamma: f64 },
}

impl JumpSpec {
    pub fn kind(&self) -> JumpKind {
        match self {
            JumpSpec::DampingUniform { .. } | JumpSpec::DampingDisordered { .. } => JumpKind::Damping,
            JumpSpec::Dephasing { .. } => JumpKind::Dephasing,
        }
    }

    /// The dissipation strength: `γ`, or `γ_max` for the disordered family.
    pub fn strength(&self) -> f64 {
        match *self {
            JumpSpec::DampingUniform { gamma } | JumpSpec::Dephasing { gamma } => gamma,
            JumpSpec::DampingDisordered { gamma_max, .. } => gamma_max,
        }
    }

    pub fn with_strength(self, value: f64) -> Self {
        match self {
            JumpSpec::DampingUniform { .. } => JumpSpec::DampingUniform { gamma: value },
            JumpSpec::Dephasing { .. } => JumpSpec::Dephasing { gamma: value },
            JumpSpec::DampingDisordered { seed, .. } => JumpSpec::DampingDisordered { gamma_max: value, seed },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpKind {
    /// Lowering operators; one-sided in the magnetization.
    Damping,
    Dephasing,
}

/// Declarative model description; the `[model]` table of an experiment file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub family: Family,
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "J", default = "one")]
    pub coupling: f64,
    /// Transverse field (TFI only).
    #[serde(rename = "h", default, skip_serializing_if = "Option::is_none")]
    pub field: Option<f64>,
    /// Nearest-neighbour anisotropy (XXZ families).
    #[serde(rename = "Delta", default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(rename = "J_nnn", default, skip_serializing_if = "Option::is_none")]
    pub nnn_coupling: Option<f64>,
    #[serde(rename = "Delta_nnn", default, skip_serializing_if = "Option::is_none")]
    pub nnn_delta: Option<f64>,
    pub jumps: JumpSpec,
}

fn one() -> f64 {
    1.0
}

impl ModelConfig {
    /// Damped TFI with `h = 1.05 J`, `γ = J`.
    pub fn damped_tfi(sites: usize) -> Self {
        Self {
            family: Family::Tfi,
            sites,
            coupling: 1.0,
            field: Some(1.05),
            delta: None,
            nnn_coupling: None,
            nnn_delta: None,
            jumps: JumpSpec::DampingUniform { gamma: 1.0 },
        }
    }

    /// Dephasing TFI with `h = 1.05 J`, `γ = J`.
    pub fn dephasing_tfi(sites: usize) -> Self {
        Self { jumps: JumpSpec::Dephasing { gamma: 1.0 }, ..Self::damped_tfi(sites) }
    }

    /// Dephasing XXZ with `Δ = 1.05 J`, `γ = J`.
    pub fn dephasing_xxz(sites: usize) -> Self {
        Self {
            family: Family::Xxz,
            sites,
            coupling: 1.0,
            field: None,
            delta: Some(1.05),
            nnn_coupling: None,
            nnn_delta: None,
            jumps: JumpSpec::Dephasing { gamma: 1.0 },
        }
    }

    /// XXZ at `Δ = J` with disordered damping rates on `[0, γ_max]`.
    pub fn disordered_xxz(sites: usize, gamma_max: f64, seed: u64) -> Self {
        Self {
            delta: Some(1.0),
            jumps: JumpSpec::DampingDisordered { gamma_max, seed: Some(seed) },
            ..Self::dephasing_xxz(sites)
        }
    }

    /// NNN XXZ with `J' = J`, `Δ = 0.5 J`, `Δ' = 1.5 J` and uniform damping `γ = J`.
    pub fn damped_nnn_xxz(sites: usize) -> Self {
        Self {
            family: Family::NnnXxz,
            sites,
            coupling: 1.0,
            field: None,
            delta: Some(0.5),
            nnn_coupling: Some(1.0),
            nnn_delta: Some(1.5),
            jumps: JumpSpec::DampingUniform { gamma: 1.0 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let min_sites = if self.family == Family::NnnXxz { 3 } else { 2 };
        if self.sites < min_sites {
            return Err(invalid(format!("L = {} is below the minimum {min_sites} for {:?}", self.sites, self.family)));
        }
        if self.sites > crate::pauli_ops::MAX_SITES {
            return Err(invalid(format!("L = {} is too large", self.sites)));
        }
        let require = |v: Option<f64>, name: &str| -> Result<()> {
            match v {
                Some(x) if x.is_finite() => Ok(()),
                Some(_) => Err(invalid(format!("{name} must be finite"))),
                None => Err(invalid(format!("missing parameter {name} for {:?}", self.family))),
            }
        };
        let forbid = |v: Option<f64>, name: &str| -> Result<()> {
            match v {
                Some(_) => Err(invalid(format!("parameter {name} does not apply to {:?}", self.family))),
                None => Ok(()),
            }
        };
        match self.family {
            Family::Tfi => {
                require(self.field, "h")?;
                forbid(self.delta, "Delta")?;
                forbid(self.nnn_coupling, "J_nnn")?;
                forbid(self.nnn_delta, "Delta_nnn")?;
            }
            Family::Xxz => {
                require(self.delta, "Delta")?;
                forbid(self.field, "h")?;
                forbid(self.nnn_coupling, "J_nnn")?;
                forbid(self.nnn_delta, "Delta_nnn")?;
            }
            Family::NnnXxz => {
                require(self.delta, "Delta")?;
                require(self.nnn_coupling, "J_nnn")?;
                require(self.nnn_delta, "Delta_nnn")?;
                forbid(self.field, "h")?;
            }
        }
        if !self.coupling.is_finite() {
            return Err(invalid("J must be finite"));
        }
        let strength = self.jumps.strength();
        if !(strength >= 0.0 && strength.is_finite()) {
            return Err(invalid(format!("dissipation rate must be a finite non-negative number, got {strength}")));
        }
        Ok(())
    }

    /// Whether `H_eff` conserves `Σσ^z`.
    pub fn conserves_magnetization(&self) -> bool {
        self.family != Family::Tfi
    }

    /// Whether the chain is reflection symmetric, i.e. `P_x` can be resolved.
    pub fn is_reflection_symmetric(&self) -> bool {
        !matches!(self.jumps, JumpSpec::DampingDisordered { .. })
    }

    /// Whether global spin inversion `Π σ^x` is a symmetry of `H_eff` and `𝕃`.
    pub fn is_inversion_symmetric(&self) -> bool {
        self.jumps.kind() == JumpKind::Dephasing
    }

    pub fn hamiltonian(&self) -> Result<OperatorMatrix> {
        self.validate()?;
        match self.family {
            Family::Tfi => build_tfi(self.sites, self.coupling, self.field.unwrap_or_default()),
            Family::Xxz => build_xxz(self.sites, self.coupling, self.delta.unwrap_or_default()),
            Family::NnnXxz => build_nnn_xxz(
                self.sites,
                self.coupling,
                self.delta.unwrap_or_default(),
                self.nnn_coupling.unwrap_or_default(),
                self.nnn_delta.unwrap_or_default(),
            ),
        }
    }

    /// Stable 64-bit fingerprint of the configuration.
    pub fn config_hash(&self) -> u64 {
        let text = format!("{self:?}");
        text.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
    }
}

/// Jump operators with their rates. Each operator already carries `√γ_i`.
#[derive(Clone, Debug)]
pub struct JumpSet {
    pub operators: Vec<OperatorMatrix>,
    pub rates: Vec<f64>,
    pub kind: JumpKind,
}

impl JumpSet {
    /// `Σ_i L_i† L_i`.
    pub fn decay_operator(&self, sites: usize) -> Result<OperatorMatrix> {
        self.operators
            .iter()
            .try_fold(OperatorMatrix::zeros(sites), |acc, l| acc.add(&l.adjoint().matmul(l)?))
    }

    pub fn is_uniform(&self) -> bool {
        self.rates.windows(2).all(|w| w[0] == w[1])
    }
}

fn bond(i: usize, j: usize, axis: Axis, coefficient: f64) -> PauliTerm {
    PauliTerm::real(coefficient, vec![(i, axis), (j, axis)])
}

fn xxz_bonds(sites: usize, range: usize, coupling: f64, delta: f64) -> Vec<PauliTerm> {
    (1..=sites.saturating_sub(range))
        .flat_map(|i| {
            [bond(i, i + range, Axis::X, coupling), bond(i, i + range, Axis::Y, coupling), bond(i, i + range, Axis::Z, coupling * delta)]
        })
        .collect()
}

/// `H = J Σ σ^z_i σ^z_{i+1} + h Σ σ^x_i`.
pub fn build_tfi(sites: usize, coupling: f64, field: f64) -> Result<OperatorMatrix> {
    if sites < 2 {
        return Err(invalid("TFI chain needs L >= 2"));
    }
    let mut terms: Vec<PauliTerm> = (1..sites).map(|i| bond(i, i + 1, Axis::Z, coupling)).collect();
    terms.extend((1..=sites).map(|i| PauliTerm::real(field, vec![(i, Axis::X)])));
    assemble(&terms, sites)
}

/// `H = J Σ (σ^x σ^x + σ^y σ^y + Δ σ^z σ^z)` on nearest-neighbour bonds.
pub fn build_xxz(sites: usize, coupling: f64, delta: f64) -> Result<OperatorMatrix> {
    if sites < 2 {
        return Err(invalid("XXZ chain needs L >= 2"));
    }
    assemble(&xxz_bonds(sites, 1, coupling, delta), sites)
}

/// XXZ chain with an additional next-nearest-neighbour XXZ coupling `(J', Δ')`.
pub fn build_nnn_xxz(sites: usize, coupling: f64, delta: f64, nnn_coupling: f64, nnn_delta: f64) -> Result<OperatorMatrix> {
    if sites < 3 {
        return Err(invalid("NNN XXZ chain needs L >= 3"));
    }
    let mut terms = xxz_bonds(sites, 1, coupling, delta);
    terms.extend(xxz_bonds(sites, 2, nnn_coupling, nnn_delta));
    assemble(&terms, sites)
}

/// Per-site damping rates drawn uniformly from `[0, gamma_max)`.
///
/// Site `i` uses its own ChaCha stream of the seed, so the list is independent
/// of evaluation order and extending `L` leaves earlier rates unchanged.
pub fn disordered_rates(sites: usize, gamma_max: f64, seed: u64) -> Vec<f64> {
    (1..=sites)
        .map(|site| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(site as u64);
            gamma_max * rng.random::<f64>()
        })
        .collect()
}

pub fn build_jumps(config: &ModelConfig) -> Result<JumpSet> {
    let sites = config.sites;
    let (axis, rates, kind) = match config.jumps {
        JumpSpec::DampingUniform { gamma } => (Axis::Minus, vec![gamma; sites], JumpKind::Damping),
        JumpSpec::Dephasing { gamma } => (Axis::Z, vec![gamma; sites], JumpKind::Dephasing),
        JumpSpec::DampingDisordered { gamma_max, seed } => {
            let seed = seed.ok_or_else(|| invalid("disordered damping requires a seed"))?;
            if !(gamma_max >= 0.0) {
                return Err(invalid(format!("negative rate {gamma_max}")));
            }
            (Axis::Minus, disordered_rates(sites, gamma_max, seed), JumpKind::Damping)
        }
    };
    if let Some(&bad) = rates.iter().find(|&&g| !(g >= 0.0 && g.is_finite())) {
        return Err(invalid(format!("rates must be finite and non-negative, got {bad}")));
    }
    let operators = rates
        .iter()
        .enumerate()
        .map(|(k, &g)| embed_term(&PauliTerm::real(g.sqrt(), vec![(k + 1, axis)]), sites))
        .collect::<Result<Vec<_>>>()?;
    Ok(JumpSet { operators, rates, kind })
}

/// `H_eff = H − (i/2) Σ_i L_i† L_i`.
pub fn build_heff(hamiltonian: &OperatorMatrix, jumps: &JumpSet) -> Result<OperatorMatrix> {
    for l in &jumps.operators {
        if l.dim() != hamiltonian.dim() {
            return Err(Error::DimensionMismatch { expected: hamiltonian.dim(), found: l.dim() });
        }
    }
    let decay = jumps.decay_operator(hamiltonian.sites())?;
    hamiltonian.add(&decay.scale(C64::new(0.0, -0.5)))
}

/// A fully built model: Hamiltonian, jumps and `H_eff`.
#[derive(Clone, Debug)]
pub struct Model {
    pub config: ModelConfig,
    pub hamiltonian: OperatorMatrix,
    pub jumps: JumpSet,
    pub heff: OperatorMatrix,
}

impl Model {
    pub fn build(config: &ModelConfig) -> Result<Self> {
        let hamiltonian = config.hamiltonian()?;
        let jumps = build_jumps(config)?;
        let heff = build_heff(&hamiltonian, &jumps)?;
        Ok(Self { config: config.clone(), hamiltonian, jumps, heff })
    }
}
