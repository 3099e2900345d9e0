//! Declarative experiment files.

use std::collections::BTreeSet;
use std::path::PathBuf;

use lindspec_core::diagnostics::UnfoldConfig;
use lindspec_core::models::{Family, JumpKind, JumpSpec, ModelConfig};
use lindspec_core::symmetry::{SectorLabel, Space};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// The no-jump generator `H_eff` on the Hilbert space.
    Heff,
    /// The full Lindbladian on the Liouville space.
    Lindbladian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    Spacings,
    Csr,
    SvRatios,
    Separability,
    BandCheck,
}

/// Which eigenvalues enter the spacing and CSR statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumView {
    #[default]
    Full,
    /// Only `Im λ > 0`, for spectra closed under conjugation.
    UpperHalfPlane,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacingMode {
    /// Nearest neighbours in the complex plane with local-density unfolding.
    #[default]
    Planar,
    /// Spacings along the imaginary axis inside bands of equal real part.
    IntraBand,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramBins {
    pub radial: usize,
    pub angular: usize,
}

impl Default for HistogramBins {
    fn default() -> Self {
        Self { radial: 4, angular: 8 }
    }
}

fn default_realizations() -> usize {
    1
}

fn default_sv_trim() -> f64 {
    0.10
}

/// One experiment: model, target generator, sector and requested diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub target: Target,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub spectrum_view: SpectrumView,
    #[serde(default)]
    pub spacing_mode: SpacingMode,
    #[serde(default)]
    pub svg: bool,
    #[serde(default = "default_sv_trim")]
    pub sv_trim: f64,
    pub model: ModelConfig,
    #[serde(default)]
    pub sector: SectorLabel,
    #[serde(default)]
    pub unfold: UnfoldConfig,
    #[serde(default)]
    pub csr_bins: HistogramBins,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("experiment file: {}", e.message())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment specs serialize")
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let digest = Sha256::digest(canonical.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn space(&self) -> Space {
        match self.target {
            Target::Heff => Space::Hilbert(self.model.sites),
            Target::Lindbladian => Space::Liouville(self.model.sites),
        }
    }

    pub fn wants(&self, d: Diagnostic) -> bool {
        self.diagnostics.contains(&d)
    }

    /// Model for realization `r`: disordered rates are reseeded per realization.
    pub fn model_for(&self, realization: usize) -> ModelConfig {
        let mut cfg = self.model.clone();
        if let JumpSpec::DampingDisordered { gamma_max, seed } = cfg.jumps {
            let base = seed.unwrap_or(self.seed);
            cfg.jumps = JumpSpec::DampingDisordered { gamma_max, seed: Some(base.wrapping_add(realization as u64)) };
        }
        cfg
    }

    /// Checks everything that can be checked before building operators.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |field: &str, msg: String| Err(CliError::Validation(format!("{field}: {msg}")));
        if self.name.trim().is_empty() {
            return fail("name", "must not be empty".into());
        }
        if let Err(e) = self.model.validate() {
            return fail("model", e.to_string());
        }
        if self.diagnostics.is_empty() {
            return fail("diagnostics", "request at least one diagnostic".into());
        }
        let distinct: BTreeSet<_> = self.diagnostics.iter().collect();
        if distinct.len() != self.diagnostics.len() {
            return fail("diagnostics", "duplicate entries".into());
        }
        if self.realizations == 0 {
            return fail("realizations", "must be at least 1".into());
        }
        if self.unfold.k_neighbors == 0 {
            return fail("unfold.k_neighbors", "must be positive".into());
        }
        if !(0.0..1.0).contains(&self.unfold.trim) {
            return fail("unfold.trim", format!("{} outside [0, 1)", self.unfold.trim));
        }
        if !(0.0..0.5).contains(&self.sv_trim) {
            return fail("sv_trim", format!("{} outside [0, 0.5)", self.sv_trim));
        }
        if self.csr_bins.radial == 0 || self.csr_bins.angular == 0 {
            return fail("csr_bins", "bin counts must be positive".into());
        }
        self.validate_sector()?;
        self.validate_diagnostics()
    }

    fn validate_sector(&self) -> Result<(), CliError> {
        let s = &self.sector;
        let m = &self.model;
        let fail = |field: &str, msg: &str| Err(CliError::Validation(format!("sector.{field}: {msg}")));
        let conserving = m.conserves_magnetization();
        let dephasing = m.jumps.kind() == JumpKind::Dephasing;
        match self.target {
            Target::Heff => {
                if s.m_p.is_some() {
                    return fail("m_p", "Liouville-space charge; an H_eff sector uses m");
                }
                if s.m_d.is_some() {
                    return fail("m_d", "Liouville-space charge; an H_eff sector uses m");
                }
                if s.m.is_some() && !conserving {
                    return fail("m", "the model does not conserve the magnetization");
                }
            }
            Target::Lindbladian => {
                if s.m.is_some() {
                    return fail("m", "Hilbert-space charge; a Lindbladian sector uses m_p/m_d");
                }
                if s.m_p.is_some() && !(conserving && dephasing) {
                    return fail("m_p", "m_p is conserved only for dephasing jumps on a magnetization-conserving chain");
                }
                if s.m_d.is_some() && !conserving {
                    return fail("m_d", "the Hamiltonian does not conserve the magnetization");
                }
            }
        }
        if s.px.is_some() && !m.is_reflection_symmetric() {
            return fail("px", "disordered rates break the reflection symmetry");
        }
        if s.inversion.is_some() && !m.is_inversion_symmetric() {
            return fail("inversion", "damping breaks the spin-inversion symmetry");
        }
        s.validate(self.space()).map_err(|e| CliError::Validation(format!("sector: {e}")))
    }

    fn validate_diagnostics(&self) -> Result<(), CliError> {
        let fail = |field: &str, msg: &str| Err(CliError::Validation(format!("diagnostics.{field}: {msg}")));
        let damping = self.model.jumps.kind() == JumpKind::Damping;
        let conserving = self.model.conserves_magnetization();
        let charge_only = self.sector.m_p.is_none() && self.sector.px.is_none() && self.sector.inversion.is_none();
        if self.wants(Diagnostic::Separability) {
            if self.target != Target::Lindbladian {
                return fail("separability", "compares a Lindbladian with its H_eff; set target = \"lindbladian\"");
            }
            if !(damping && conserving) {
                return fail("separability", "needs damping jumps on a magnetization-conserving chain");
            }
            if !charge_only {
                return fail("separability", "the prediction is available for full or fixed-m_d sectors only");
            }
        }
        if self.wants(Diagnostic::BandCheck) {
            if self.target != Target::Lindbladian {
                return fail("band_check", "set target = \"lindbladian\"");
            }
            if !matches!(self.model.jumps, JumpSpec::DampingUniform { .. }) || !conserving {
                return fail("band_check", "needs uniform damping on a magnetization-conserving chain");
            }
            if self.model.family == Family::Tfi || !charge_only {
                return fail("band_check", "the prediction is available for full or fixed-m_d sectors only");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
name = "xxz"
target = "lindbladian"
diagnostics = ["spacings", "csr"]

[model]
family = "xxz"
L = 3
Delta = 1.05
jumps = { kind = "dephasing", gamma = 1.0 }

[sector]
m_p = 2
m_d = 0
px = "even"
"#;

    #[test]
    fn parses_and_validates() {
        let spec = ExperimentSpec::from_toml(EXAMPLE).unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.unfold, UnfoldConfig::default());
        assert_eq!(spec.realizations, 1);
        let back = ExperimentSpec::from_toml(&spec.to_toml()).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.hash(), spec.hash());
    }

    #[test]
    fn missing_delta_is_named() {
        let text = EXAMPLE.replace("Delta = 1.05\n", "");
        let err = ExperimentSpec::from_toml(&text).unwrap().validate().unwrap_err();
        assert!(err.to_string().contains("Delta"), "{err}");
    }

    #[test]
    fn fixed_m_p_with_damping_is_rejected() {
        let text = EXAMPLE.replace(r#"{ kind = "dephasing", gamma = 1.0 }"#, r#"{ kind = "damping_uniform", gamma = 1.0 }"#);
        let err = ExperimentSpec::from_toml(&text).unwrap().validate().unwrap_err();
        assert!(err.to_string().contains("sector.m_p"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = EXAMPLE.replace("[sector]", "colour = 3\n[sector]");
        assert!(matches!(ExperimentSpec::from_toml(&text), Err(CliError::Validation(_))));
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = ExperimentSpec::from_toml(EXAMPLE).unwrap();
        let mut b = a.clone();
        b.output = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 9;
        assert_ne!(a.hash(), b.hash());
    }
}
