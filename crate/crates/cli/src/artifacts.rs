//! Result records and the files written next to them.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lindspec_core::{SectorLabel, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::experiment::{Diagnostic, ExperimentSpec, Target};
use crate::pipeline::{compute, summarize, Checks, PlotData, RealizationSpectra, Summaries};
use crate::svg;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SPEC_FILE: &str = "spec.toml";
pub const SPECTRA_FILE: &str = "spectra.csv";
pub const RESULT_FILE: &str = "result.json";
pub const TIMING_FILE: &str = "timing.json";
pub const SPACINGS_FILE: &str = "spacings.csv";
pub const CSR_FILE: &str = "csr.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub toolkit_version: String,
    pub name: String,
    pub spec_hash: String,
    pub model_hash: String,
    pub target: Target,
    pub sector: String,
    pub dimension: usize,
    pub realizations: usize,
    pub seed: u64,
    pub spectra_files: Vec<String>,
    pub plot_files: Vec<String>,
    pub summaries: Summaries,
    pub checks: Checks,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Eigenvalue,
    SingularValue,
    Predicted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub kind: RowKind,
    pub realization: usize,
    pub re: f64,
    pub im: f64,
    pub target: Target,
    pub m: Option<i32>,
    pub m_p: Option<i32>,
    pub m_d: Option<i32>,
    pub px: Option<String>,
    pub inversion: Option<String>,
    pub model_hash: String,
}

fn parity_name(p: Option<lindspec_core::Parity>) -> Option<String> {
    p.map(|p| match p {
        lindspec_core::Parity::Even => "even".to_string(),
        lindspec_core::Parity::Odd => "odd".to_string(),
    })
}

fn model_hash(spec: &ExperimentSpec, realization: usize) -> String {
    format!("{:016x}", spec.model_for(realization).config_hash())
}

pub fn write_spectra(path: &Path, spec: &ExperimentSpec, realizations: &[RealizationSpectra]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let s: &SectorLabel = &spec.sector;
    for (r, spectra) in realizations.iter().enumerate() {
        let hash = model_hash(spec, r);
        let row = |kind, z: C64| SpectrumRow {
            kind,
            realization: r,
            re: z.re,
            im: z.im,
            target: spec.target,
            m: s.m,
            m_p: s.m_p,
            m_d: s.m_d,
            px: parity_name(s.px),
            inversion: parity_name(s.inversion),
            model_hash: hash.clone(),
        };
        for &z in &spectra.eigenvalues {
            w.serialize(row(RowKind::Eigenvalue, z))?;
        }
        for &x in &spectra.singular_values {
            w.serialize(row(RowKind::SingularValue, C64::new(x, 0.0)))?;
        }
        for &z in &spectra.predicted {
            w.serialize(row(RowKind::Predicted, z))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_spectra(path: &Path, realizations: usize) -> Result<Vec<RealizationSpectra>, CliError> {
    let mut out = vec![RealizationSpectra::default(); realizations];
    let mut reader = csv::Reader::from_path(path)?;
    for row in reader.deserialize() {
        let row: SpectrumRow = row.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let slot = out.get_mut(row.realization).ok_or_else(|| {
            CliError::Validation(format!("{}: realization {} out of range", path.display(), row.realization))
        })?;
        match row.kind {
            RowKind::Eigenvalue => slot.eigenvalues.push(C64::new(row.re, row.im)),
            RowKind::SingularValue => slot.singular_values.push(row.re),
            RowKind::Predicted => slot.predicted.push(C64::new(row.re, row.im)),
        }
    }
    Ok(out)
}

/// One-column `s` file of unfolded spacings.
pub fn write_spacings(path: &Path, spacings: &[f64]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["s"])?;
    for s in spacings {
        w.write_record([s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `re,im` file of complex points (CSR ratios or eigenvalues).
pub fn write_points(path: &Path, points: &[C64]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["re", "im"])?;
    for z in points {
        w.write_record([z.re.to_string(), z.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct Timing {
    wall_clock_seconds: f64,
}

fn write_plots(dir: &Path, spec: &ExperimentSpec, realizations: &[RealizationSpectra], summaries: &Summaries, plots: &PlotData) -> Result<Vec<String>, CliError> {
    let mut files = Vec::new();
    if spec.wants(Diagnostic::Spacings) {
        write_spacings(&dir.join(SPACINGS_FILE), &plots.spacings)?;
        files.push(SPACINGS_FILE.to_string());
    }
    if spec.wants(Diagnostic::Csr) {
        write_points(&dir.join(CSR_FILE), &plots.csr)?;
        files.push(CSR_FILE.to_string());
    }
    if spec.svg {
        if spec.wants(Diagnostic::Spacings) {
            let refs = svg::default_references(spec.spacing_mode);
            fs::write(dir.join("spacings.svg"), svg::spacings_plot(&plots.spacings, &refs)?)?;
            files.push("spacings.svg".to_string());
        }
        if let Some(c) = &summaries.csr {
            fs::write(dir.join("csr.svg"), svg::csr_heatmap(&plots.csr, c.radial_bins, c.angular_bins)?)?;
            files.push("csr.svg".to_string());
        }
        if spec.target == Target::Lindbladian {
            fs::write(dir.join("bands.svg"), svg::band_scatter(&realizations[0].eigenvalues)?)?;
            files.push("bands.svg".to_string());
        }
    }
    Ok(files)
}

/// Runs one experiment and writes its artifacts into `dir`.
pub fn run_experiment(spec: &ExperimentSpec, dir: &Path) -> Result<ResultRecord, CliError> {
    let start = Instant::now();
    spec.validate()?;
    let outcome = compute(spec)?;
    let (summaries, plots) = summarize(spec, &outcome.realizations)?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join(SPEC_FILE), spec.to_toml())?;
    write_spectra(&dir.join(SPECTRA_FILE), spec, &outcome.realizations)?;
    let plot_files = write_plots(dir, spec, &outcome.realizations, &summaries, &plots)?;
    let record = ResultRecord {
        toolkit_version: TOOLKIT_VERSION.to_string(),
        name: spec.name.clone(),
        spec_hash: spec.hash(),
        model_hash: model_hash(spec, 0),
        target: spec.target,
        sector: spec.sector.to_string(),
        dimension: outcome.dimension,
        realizations: spec.realizations,
        seed: spec.seed,
        spectra_files: vec![SPECTRA_FILE.to_string()],
        plot_files,
        summaries,
        checks: outcome.checks,
    };
    write_json(&dir.join(RESULT_FILE), &record)?;
    write_json(&dir.join(TIMING_FILE), &Timing { wall_clock_seconds: start.elapsed().as_secs_f64() })?;
    Ok(record)
}

/// Recomputes the summaries of a finished run from its persisted spec and spectra.
pub fn rediagnose(dir: &Path) -> Result<Summaries, CliError> {
    let text = fs::read_to_string(dir.join(SPEC_FILE))?;
    let spec = ExperimentSpec::from_toml(&text)?;
    let realizations = read_spectra(&dir.join(SPECTRA_FILE), spec.realizations)?;
    Ok(summarize(&spec, &realizations)?.0)
}

pub fn read_record(dir: &Path) -> Result<ResultRecord, CliError> {
    let text = fs::read_to_string(dir.join(RESULT_FILE))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", RESULT_FILE)))
}

/// Output directory: explicit flag first, then the spec's own `output`.
pub fn resolve_output(flag: Option<&Path>, spec: &ExperimentSpec) -> Result<PathBuf, CliError> {
    flag.map(Path::to_path_buf)
        .or_else(|| spec.output.clone())
        .ok_or_else(|| CliError::Validation("output: pass --out or set `output` in the experiment file".into()))
}
