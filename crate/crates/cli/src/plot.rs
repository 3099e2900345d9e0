//! `emit-plot`: SVG figures from plot-data CSV files.

use std::path::Path;

use clap::ValueEnum;
use lindspec_core::diagnostics::ReferenceKind;
use lindspec_core::C64;

use crate::error::CliError;
use crate::svg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    /// Histogram of a one-column `s` file with reference curves.
    Spacings,
    /// Disk heatmap of a `re,im` file of spacing ratios.
    Csr,
    /// Scatter of a `re,im` file, e.g. `spectra.csv`.
    Bands,
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize, CliError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Validation(format!("{}: missing column {name:?}", path.display())))
}

fn parse(field: Option<&str>, path: &Path, line: usize) -> Result<f64, CliError> {
    field
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| CliError::Validation(format!("{}: line {line}: expected a number", path.display())))
}

pub fn read_spacings(path: &Path) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::Reader::from_path(path)?;
    let s = column(reader.headers()?, "s", path)?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        out.push(parse(rec.get(s), path, i + 2)?);
    }
    Ok(out)
}

/// Complex points from `re,im` columns. Files with a `kind` column keep only
/// eigenvalue rows.
pub fn read_points(path: &Path) -> Result<Vec<C64>, CliError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let (re, im) = (column(&headers, "re", path)?, column(&headers, "im", path)?);
    let kind = headers.iter().position(|h| h == "kind");
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        if kind.is_some_and(|k| rec.get(k) != Some("eigenvalue")) {
            continue;
        }
        out.push(C64::new(parse(rec.get(re), path, i + 2)?, parse(rec.get(im), path, i + 2)?));
    }
    Ok(out)
}

pub fn render(kind: PlotKind, data: &Path, references: &[ReferenceKind], bins: (usize, usize)) -> Result<String, CliError> {
    match kind {
        PlotKind::Spacings => svg::spacings_plot(&read_spacings(data)?, references),
        PlotKind::Csr => svg::csr_heatmap(&read_points(data)?, bins.0, bins.1),
        PlotKind::Bands => svg::band_scatter(&read_points(data)?),
    }
}
