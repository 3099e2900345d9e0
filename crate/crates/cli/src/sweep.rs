//! Parameter grids over a base experiment.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use lindspec_core::JumpSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::experiment::ExperimentSpec;
use crate::pipeline::{compute, summarize, Summaries};

pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_JSON: &str = "sweep.json";

/// Grid keys a sweep may vary.
pub const PARAMETERS: [&str; 7] = ["gamma", "h", "Delta", "J", "J_nnn", "Delta_nnn", "L"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// One cell per seed and grid point. Defaults to the experiment's seed.
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub grid: BTreeMap<String, Vec<f64>>,
    pub experiment: ExperimentSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub cell: usize,
    pub parameters: BTreeMap<String, f64>,
    pub seed: u64,
    pub cell_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summaries: Option<Summaries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CellRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// splitmix64 finalizer over `(seed, cell)`.
pub fn cell_seed(seed: u64, cell: usize) -> u64 {
    let mut z = seed ^ (cell as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("sweep file: {}", e.message())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid.is_empty() {
            return Err(CliError::Validation("grid: no parameters to sweep".into()));
        }
        for (key, values) in &self.grid {
            if !PARAMETERS.contains(&key.as_str()) {
                return Err(CliError::Validation(format!("grid.{key}: not a sweepable parameter ({})", PARAMETERS.join(", "))));
            }
            if values.is_empty() {
                return Err(CliError::Validation(format!("grid.{key}: empty value list")));
            }
            if key == "L" && values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
                return Err(CliError::Validation("grid.L: chain lengths must be positive integers".into()));
            }
        }
        Ok(())
    }

    fn seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.experiment.seed]
        } else {
            self.seeds.clone()
        }
    }

    /// Grid points in key order (last key fastest), each repeated per seed.
    pub fn cells(&self) -> Vec<(BTreeMap<String, f64>, u64)> {
        let mut points = vec![BTreeMap::new()];
        for (key, values) in &self.grid {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.insert(key.clone(), v);
                        q
                    })
                })
                .collect();
        }
        let seeds = self.seeds();
        points.into_iter().flat_map(|p| seeds.iter().map(move |&s| (p.clone(), s))).collect()
    }
}

/// The base experiment with grid values substituted.
pub fn apply_parameters(base: &ExperimentSpec, params: &BTreeMap<String, f64>) -> ExperimentSpec {
    let mut spec = base.clone();
    let m = &mut spec.model;
    for (key, &v) in params {
        match key.as_str() {
            "gamma" => m.jumps = m.jumps.with_strength(v),
            "h" => m.field = Some(v),
            "Delta" => m.delta = Some(v),
            "J" => m.coupling = v,
            "J_nnn" => m.nnn_coupling = Some(v),
            "Delta_nnn" => m.nnn_delta = Some(v),
            "L" => m.sites = v as usize,
            _ => unreachable!("checked by SweepSpec::validate"),
        }
    }
    spec
}

fn run_cell(spec: &SweepSpec, cell: usize, params: BTreeMap<String, f64>, seed: u64) -> CellRecord {
    let derived = cell_seed(seed, cell);
    let mut exp = apply_parameters(&spec.experiment, &params);
    exp.seed = derived;
    if let JumpSpec::DampingDisordered { gamma_max, .. } = exp.model.jumps {
        exp.model.jumps = JumpSpec::DampingDisordered { gamma_max, seed: None };
    }
    let result = compute(&exp).and_then(|o| Ok((o.dimension, summarize(&exp, &o.realizations)?.0)));
    let (dimension, summaries, error) = match result {
        Ok((d, s)) => (Some(d), Some(s), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    CellRecord { cell, parameters: params, seed, cell_seed: derived, dimension, summaries, error }
}

/// Runs every cell in parallel. Records come back in cell order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<CellRecord>, CliError> {
    spec.validate()?;
    let cells = spec.cells();
    Ok(cells.into_par_iter().enumerate().map(|(i, (p, s))| run_cell(spec, i, p, s)).collect())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_table(path: &Path, spec: &SweepSpec, records: &[CellRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["cell".to_string()];
    header.extend(spec.grid.keys().cloned());
    header.extend(
        [
            "seed", "cell_seed", "status", "dimension", "sv_r_mean", "ks_ginibre", "ks_poisson2d", "csr_mean_abs",
            "csr_mean_cos", "csr_defect", "error",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for r in records {
        let s = r.summaries.as_ref();
        let spacing = s.and_then(|s| s.spacings.as_ref());
        let csr = s.and_then(|s| s.csr.as_ref());
        let mut row = vec![r.cell.to_string()];
        row.extend(spec.grid.keys().map(|k| r.parameters[k].to_string()));
        row.extend([
            r.seed.to_string(),
            r.cell_seed.to_string(),
            if r.failed() { "failed" } else { "ok" }.to_string(),
            opt(r.dimension),
            opt(s.and_then(|s| s.sv_ratios.as_ref()).map(|x| x.mean)),
            opt(spacing.map(|x| x.ks["ginibre"])),
            opt(spacing.map(|x| x.ks["poisson2d"])),
            opt(csr.map(|x| x.mean_abs)),
            opt(csr.map(|x| x.mean_cos)),
            opt(csr.map(|x| x.uniformity_defect)),
            r.error.clone().unwrap_or_default(),
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the sweep and writes `sweep.csv` and `sweep.json` into `dir`.
/// Fails with [`CliError::PartialFailure`] after writing if any cell failed.
pub fn sweep_to_dir(spec: &SweepSpec, dir: &Path) -> Result<Vec<CellRecord>, CliError> {
    let records = run_sweep(spec)?;
    fs::create_dir_all(dir)?;
    write_table(&dir.join(SWEEP_CSV), spec, &records)?;
    let mut json = serde_json::to_string_pretty(&records)?;
    json.push('\n');
    fs::write(dir.join(SWEEP_JSON), json)?;
    let failed = records.iter().filter(|r| r.failed()).count();
    if failed > 0 {
        return Err(CliError::PartialFailure { failed, total: records.len() });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
seeds = [1, 2]

[grid]
gamma = [0.5, 1.0]
h = [1.0, 1.05, 1.1]

[experiment]
name = "tfi"
target = "heff"
diagnostics = ["sv_ratios"]

[experiment.model]
family = "tfi"
L = 4
h = 1.05
jumps = { kind = "damping_uniform", gamma = 1.0 }
"#;

    #[test]
    fn cells_are_the_cartesian_product() {
        let s = SweepSpec::from_toml(BASE).unwrap();
        let cells = s.cells();
        assert_eq!(cells.len(), 12);
        assert_eq!(cells[0].0["gamma"], 0.5);
        assert_eq!(cells[0].0["h"], 1.0);
        assert_eq!((cells[1].0["h"], cells[1].1), (1.0, 2));
        assert_eq!(cells[2].0["h"], 1.05);
        assert_eq!(cells[11].0["gamma"], 1.0);
    }

    #[test]
    fn parameters_land_in_the_model() {
        let s = SweepSpec::from_toml(BASE).unwrap();
        let p = BTreeMap::from([("gamma".to_string(), 3.0), ("L".to_string(), 6.0)]);
        let e = apply_parameters(&s.experiment, &p);
        assert_eq!(e.model.jumps, JumpSpec::DampingUniform { gamma: 3.0 });
        assert_eq!(e.model.sites, 6);
    }

    #[test]
    fn bad_grids_are_rejected() {
        let empty = BASE.replace("gamma = [0.5, 1.0]\nh = [1.0, 1.05, 1.1]\n", "");
        assert!(SweepSpec::from_toml(&empty).unwrap().validate().is_err());
        let blank = BASE.replace("gamma = [0.5, 1.0]", "gamma = []");
        assert!(SweepSpec::from_toml(&blank).unwrap().validate().is_err());
        let unknown = BASE.replace("gamma = [0.5, 1.0]", "beta = [1.0]");
        assert!(SweepSpec::from_toml(&unknown).unwrap().validate().is_err());
    }

    #[test]
    fn cell_seeds_differ() {
        assert_ne!(cell_seed(1, 0), cell_seed(1, 1));
        assert_ne!(cell_seed(1, 0), cell_seed(2, 0));
    }
}
