//! Desk-scale figure presets, shipped as annotated experiment files.

use serde::Deserialize;

use crate::error::CliError;
use crate::experiment::ExperimentSpec;

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2-desk",
        summary: "damped TFI: H_eff at L=12 and Lindbladian at L=6, even P_x",
        text: include_str!("../presets/fig2-desk.toml"),
    },
    Preset {
        name: "fig3-desk",
        summary: "dephasing XXZ (m_p, m_d) = (2, 0) against dephasing TFI, Lindbladians at L=5",
        text: include_str!("../presets/fig3-desk.toml"),
    },
    Preset {
        name: "fig3-sep",
        summary: "damped XXZ at L=5, m_d=0: Lindbladian spectrum from H_eff pairs",
        text: include_str!("../presets/fig3-sep.toml"),
    },
    Preset {
        name: "fig4-desk",
        summary: "disordered damped XXZ, gamma_max = 2 and 20, 20 realizations",
        text: include_str!("../presets/fig4-desk.toml"),
    },
    Preset {
        name: "fig5-desk",
        summary: "uniformly damped NNN XXZ at L=5: band structure check",
        text: include_str!("../presets/fig5-desk.toml"),
    },
];

pub fn find(name: &str) -> Result<&'static Preset, CliError> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        CliError::Validation(format!("preset: unknown name {name:?}; available: {}", names.join(", ")))
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    experiment: Vec<ExperimentSpec>,
}

/// Parses either a single experiment or an `[[experiment]]` list.
pub fn load_plan(text: &str) -> Result<Vec<ExperimentSpec>, CliError> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| CliError::Validation(format!("experiment file: {}", e.message())))?;
    if table.contains_key("experiment") {
        let plan: PlanFile =
            toml::from_str(text).map_err(|e| CliError::Validation(format!("experiment file: {}", e.message())))?;
        if plan.experiment.is_empty() {
            return Err(CliError::Validation("experiment: the list is empty".into()));
        }
        Ok(plan.experiment)
    } else {
        Ok(vec![ExperimentSpec::from_toml(text)?])
    }
}
