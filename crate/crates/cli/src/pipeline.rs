//! Model → sector block → spectra → diagnostics.

use std::collections::BTreeMap;
use std::sync::Arc;

use lindspec_core::diagnostics::{
    csr, csr_disk_histogram, intra_band_spacings, ks_distance, level_ratios, pool_csr, unfold_pooled,
    uniform_baseline_defect, upper_half_plane, CsrSample, ReferenceKind, R_AI, R_BDI_DAGGER, R_POISSON,
};
use lindspec_core::liouville::{charge_ordered_form, eigenvalues_by_magnetization, separable_spectrum, uniform_damping_band_prediction, ChargeStep};
use lindspec_core::matching::multiset_distance;
use lindspec_core::spectral_core::{singular_values, sparse_eigenvalues, ComplexSpectrum, MAX_DENSE_DIM};
use lindspec_core::symmetry::{project, SectorBasis, SectorBlock};
use lindspec_core::{build_lindbladian, Error, Model, SectorLabel, Space, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::experiment::{Diagnostic, ExperimentSpec, SpacingMode, SpectrumView, Target};

/// Draws averaged for the uniform-disk CSR baseline.
pub const BASELINE_DRAWS: usize = 20;
/// Relative tolerance under which real parts belong to the same band.
pub const BAND_TOL: f64 = 1e-8;
/// Relative imaginary-part cut of the upper half-plane view.
pub const HALF_PLANE_TOL: f64 = 1e-10;

/// Spectra of one realization, as persisted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RealizationSpectra {
    pub eigenvalues: Vec<C64>,
    /// Singular values of the traceless block, when requested.
    pub singular_values: Vec<f64>,
    /// Formula prediction for separability or band checks.
    pub predicted: Vec<C64>,
}

/// Numbers measured on operators rather than spectra.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Checks {
    pub projection_residual: f64,
    pub trace_first_moment: f64,
    pub trace_second_moment: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_triangular_violations: Option<usize>,
    /// `‖[H, Σ L†L]‖_max`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_commutator: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub dimension: usize,
    pub realizations: Vec<RealizationSpectra>,
    pub checks: Checks,
}

/// Charge-sector dimension divided by the number of resolved parities.
/// Cheap, and close enough to reject oversized requests before enumeration.
pub fn estimated_dim(space: Space, label: &SectorLabel) -> f64 {
    let l = space.sites();
    let binom = |k: usize| -> f64 { (0..k).fold(1.0, |acc, i| acc * (l - i) as f64 / (i + 1) as f64) };
    let charge_dim = match space {
        Space::Hilbert(_) => match label.m {
            Some(m) => binom(((l as i32 + m) / 2) as usize),
            None => space.dim() as f64,
        },
        Space::Liouville(_) => {
            let mut total = 0.0;
            for a in 0..=l {
                for b in 0..=l {
                    let (mk, mb) = (2 * a as i32 - l as i32, 2 * b as i32 - l as i32);
                    if label.m_p.is_none_or(|p| p == mk + mb) && label.m_d.is_none_or(|d| d == mk - mb) {
                        total += binom(a) * binom(b);
                    }
                }
            }
            total
        }
    };
    let parities = label.px.is_some() as i32 + label.inversion.is_some() as i32;
    charge_dim / 2f64.powi(parities)
}

/// Rejects sectors that cannot be diagonalized densely. Returns the exact
/// sector basis otherwise.
pub fn sector_basis(spec: &ExperimentSpec) -> Result<Arc<SectorBasis>, CliError> {
    let space = spec.space();
    let estimate = estimated_dim(space, &spec.sector);
    if estimate > 1.05 * MAX_DENSE_DIM as f64 {
        return Err(CliError::Numerical(Error::SizeLimit { dim: estimate.round() as usize, limit: MAX_DENSE_DIM }));
    }
    let basis = SectorBasis::new(space, spec.sector).map_err(|e| CliError::Validation(format!("sector: {e}")))?;
    if basis.dim() > MAX_DENSE_DIM {
        return Err(CliError::Numerical(Error::SizeLimit { dim: basis.dim(), limit: MAX_DENSE_DIM }));
    }
    if basis.dim() == 0 {
        return Err(CliError::Validation(format!("sector: {} is empty for L = {}", spec.sector, spec.model.sites)));
    }
    Ok(Arc::new(basis))
}

struct Realization {
    spectra: RealizationSpectra,
    checks: Checks,
}

fn run_realization(spec: &ExperimentSpec, basis: &Arc<SectorBasis>, r: usize) -> Result<Realization, Error> {
    let model = Model::build(&spec.model_for(r))?;
    let mut checks = Checks::default();
    let mut predicted = Vec::new();
    let block: SectorBlock = match spec.target {
        Target::Heff => project(model.heff.matrix(), basis)?,
        Target::Lindbladian => {
            let lind = build_lindbladian(&model.heff, &model.jumps)?;
            if spec.wants(Diagnostic::Separability) {
                let form = charge_ordered_form(&lind, ChargeStep::Lowering);
                checks.block_triangular_violations =
                    Some(form.recycling_violations.len() + form.no_jump_violations.len());
                let heff_eigs = eigenvalues_by_magnetization(&model.heff)?;
                predicted = separable_spectrum(&heff_eigs, spec.sector.m_d).values;
            }
            if spec.wants(Diagnostic::BandCheck) {
                let decay = model.jumps.decay_operator(model.config.sites)?;
                checks.decay_commutator = Some(model.hamiltonian.commutator(&decay)?.max_abs());
                predicted =
                    uniform_damping_band_prediction(&model.hamiltonian, spec.model.jumps.strength(), spec.sector.m_d)?
                        .values;
            }
            project(lind.full(), basis)?
        }
    };
    checks.projection_residual = block.residual;
    let spectrum = sparse_eigenvalues(&block.matrix)?;
    checks.trace_first_moment = spectrum.residual.first_moment;
    checks.trace_second_moment = spectrum.residual.second_moment;
    let singular = if spec.wants(Diagnostic::SvRatios) {
        singular_values(block.matrix.to_dense().as_ref(), true)?.values
    } else {
        Vec::new()
    };
    Ok(Realization { spectra: RealizationSpectra { eigenvalues: spectrum.values, singular_values: singular, predicted }, checks })
}

/// Builds and diagonalizes every realization. Realizations run in parallel;
/// results keep realization order.
pub fn compute(spec: &ExperimentSpec) -> Result<Outcome, CliError> {
    spec.validate()?;
    let basis = sector_basis(spec)?;
    let results: Vec<Result<Realization, Error>> =
        (0..spec.realizations).into_par_iter().map(|r| run_realization(spec, &basis, r)).collect();
    let mut realizations = Vec::with_capacity(results.len());
    let mut checks = Checks::default();
    for res in results {
        let r = res.map_err(CliError::Numerical)?;
        checks.projection_residual = checks.projection_residual.max(r.checks.projection_residual);
        checks.trace_first_moment = checks.trace_first_moment.max(r.checks.trace_first_moment);
        checks.trace_second_moment = checks.trace_second_moment.max(r.checks.trace_second_moment);
        if let Some(v) = r.checks.block_triangular_violations {
            *checks.block_triangular_violations.get_or_insert(0) += v;
        }
        if let Some(v) = r.checks.decay_commutator {
            let c = checks.decay_commutator.get_or_insert(0.0);
            *c = c.max(v);
        }
        realizations.push(r.spectra);
    }
    Ok(Outcome { dimension: basis.dim(), realizations, checks })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingSummary {
    pub mode: SpacingMode,
    pub view: SpectrumView,
    pub count: usize,
    /// KS distance to each reference law, keyed by reference name.
    pub ks: BTreeMap<String, f64>,
    /// Closer of the uncorrelated and the correlated law for the spacing
    /// mode (`poisson2d`/`ginibre` or `poisson_real`/`wigner_dyson`).
    pub nearest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsrSummary {
    pub view: SpectrumView,
    pub count: usize,
    pub collapsed: usize,
    pub mean_abs: f64,
    pub mean_cos: f64,
    pub uniformity_defect: f64,
    /// Mean defect of i.i.d. uniform clouds with the same sample size.
    pub baseline_defect: f64,
    pub central_mass: f64,
    pub uniform_ring_mass: f64,
    pub radial_bins: usize,
    pub angular_bins: usize,
    pub histogram: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub count: usize,
    pub degenerate: usize,
    pub trim: f64,
    pub mean: f64,
    pub distance_poisson: f64,
    pub distance_ai: f64,
    pub distance_bdi_dagger: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparabilitySummary {
    /// Largest greedy-matching distance over realizations.
    pub max_distance: f64,
    pub median_modulus: f64,
    pub relative_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandSummary {
    pub max_prediction_error: f64,
    pub real_parts: Vec<f64>,
    pub expected_gap: f64,
    pub min_gap: f64,
    pub max_gap: f64,
}

/// Everything in here is a function of the spec and the persisted spectra.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summaries {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacings: Option<SpacingSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csr: Option<CsrSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sv_ratios: Option<RatioSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separability: Option<SeparabilitySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_check: Option<BandSummary>,
}

/// Per-sample data behind the summaries, for plot files.
#[derive(Clone, Debug, Default)]
pub struct PlotData {
    pub spacings: Vec<f64>,
    pub csr: Vec<C64>,
}

fn viewed(values: &[C64], view: SpectrumView) -> Vec<C64> {
    match view {
        SpectrumView::Full => values.to_vec(),
        SpectrumView::UpperHalfPlane => upper_half_plane(values, HALF_PLANE_TOL),
    }
}

fn spacing_summary(spec: &ExperimentSpec, spectra: &[Vec<C64>]) -> Result<(SpacingSummary, Vec<f64>), Error> {
    let spacings = match spec.spacing_mode {
        SpacingMode::Planar => unfold_pooled(spectra, spec.unfold)?.spacings,
        SpacingMode::IntraBand => {
            let mut raw = Vec::new();
            for s in spectra {
                let scale = s.iter().map(|v| v.norm()).fold(0.0, f64::max);
                raw.extend(intra_band_spacings(s, BAND_TOL * scale)?.spacings);
            }
            let mean = raw.iter().sum::<f64>() / raw.len() as f64;
            raw.iter().map(|s| s / mean).collect()
        }
    };
    let mut ks = BTreeMap::new();
    for kind in ReferenceKind::ALL {
        ks.insert(kind.name().to_string(), ks_distance(&spacings, kind)?);
    }
    let [uncorrelated, correlated] = match spec.spacing_mode {
        SpacingMode::Planar => [ReferenceKind::Poisson2d, ReferenceKind::Ginibre],
        SpacingMode::IntraBand => [ReferenceKind::PoissonReal, ReferenceKind::WignerDyson],
    }
    .map(ReferenceKind::name);
    let nearest = if ks[correlated] < ks[uncorrelated] { correlated } else { uncorrelated }.to_string();
    let summary = SpacingSummary { mode: spec.spacing_mode, view: spec.spectrum_view, count: spacings.len(), ks, nearest };
    Ok((summary, spacings))
}

fn csr_summary(spec: &ExperimentSpec, spectra: &[Vec<C64>]) -> Result<(CsrSummary, Vec<C64>), Error> {
    let samples: Vec<CsrSample> = spectra.iter().map(|s| csr(s)).collect::<Result<_, _>>()?;
    let pooled = pool_csr(&samples)?;
    let hist = csr_disk_histogram(&pooled, spec.csr_bins.radial, spec.csr_bins.angular)?;
    let summary = CsrSummary {
        view: spec.spectrum_view,
        count: pooled.len(),
        collapsed: pooled.collapsed,
        mean_abs: pooled.mean_abs,
        mean_cos: pooled.mean_cos,
        uniformity_defect: pooled.uniformity_defect(),
        baseline_defect: uniform_baseline_defect(pooled.len(), BASELINE_DRAWS, spec.seed)?,
        central_mass: hist.central_mass(),
        uniform_ring_mass: hist.uniform_ring_mass(),
        radial_bins: hist.radial_bins,
        angular_bins: hist.angular_bins,
        histogram: hist.mass,
    };
    Ok((summary, pooled.ratios))
}

fn ratio_summary(spec: &ExperimentSpec, realizations: &[RealizationSpectra]) -> Result<RatioSummary, Error> {
    let mut ratios = Vec::new();
    let mut degenerate = 0;
    for r in realizations {
        let sample = level_ratios(&r.singular_values, spec.sv_trim)?;
        ratios.extend(sample.ratios);
        degenerate += sample.degenerate;
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(RatioSummary {
        count: ratios.len(),
        degenerate,
        trim: spec.sv_trim,
        mean,
        distance_poisson: (mean - R_POISSON).abs(),
        distance_ai: (mean - R_AI).abs(),
        distance_bdi_dagger: (mean - R_BDI_DAGGER).abs(),
    })
}

fn separability_summary(realizations: &[RealizationSpectra]) -> Result<SeparabilitySummary, Error> {
    let mut max_distance: f64 = 0.0;
    let mut median_modulus = f64::INFINITY;
    for r in realizations {
        max_distance = max_distance.max(multiset_distance(&r.eigenvalues, &r.predicted)?);
        median_modulus = median_modulus.min(ComplexSpectrum::from_values(r.eigenvalues.clone()).median_modulus());
    }
    Ok(SeparabilitySummary { max_distance, median_modulus, relative_distance: max_distance / median_modulus })
}

/// Distinct real parts, merged within `BAND_TOL · max|λ|`, ascending.
pub fn band_real_parts(values: &[C64]) -> Vec<f64> {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut re: Vec<f64> = values.iter().map(|v| v.re).collect();
    re.sort_by(f64::total_cmp);
    let mut bands: Vec<(f64, usize, f64)> = Vec::new();
    for x in re {
        match bands.last_mut() {
            Some((first, n, sum)) if x - *first <= BAND_TOL * scale => {
                *n += 1;
                *sum += x;
            }
            _ => bands.push((x, 1, x)),
        }
    }
    bands.into_iter().map(|(_, n, sum)| sum / n as f64).collect()
}

fn band_summary(spec: &ExperimentSpec, realizations: &[RealizationSpectra]) -> Result<BandSummary, Error> {
    let mut max_prediction_error: f64 = 0.0;
    for r in realizations {
        max_prediction_error = max_prediction_error.max(multiset_distance(&r.eigenvalues, &r.predicted)?);
    }
    let real_parts = band_real_parts(&realizations[0].eigenvalues);
    let gaps: Vec<f64> = real_parts.windows(2).map(|w| w[1] - w[0]).collect();
    let gamma = spec.model.jumps.strength();
    let expected_gap = if spec.sector.m_d.is_some() { gamma } else { gamma / 2.0 };
    Ok(BandSummary {
        max_prediction_error,
        expected_gap,
        min_gap: gaps.iter().cloned().fold(f64::INFINITY, f64::min),
        max_gap: gaps.iter().cloned().fold(0.0, f64::max),
        real_parts,
    })
}

/// Diagnostics from spectra alone; shared by fresh runs and re-analysis of
/// persisted spectra.
pub fn summarize(spec: &ExperimentSpec, realizations: &[RealizationSpectra]) -> Result<(Summaries, PlotData), CliError> {
    let inner = || -> Result<(Summaries, PlotData), Error> {
        let mut out = Summaries::default();
        let mut plots = PlotData::default();
        let spectra: Vec<Vec<C64>> = realizations.iter().map(|r| viewed(&r.eigenvalues, spec.spectrum_view)).collect();
        if spec.wants(Diagnostic::Spacings) {
            let (s, data) = spacing_summary(spec, &spectra)?;
            out.spacings = Some(s);
            plots.spacings = data;
        }
        if spec.wants(Diagnostic::Csr) {
            let (s, data) = csr_summary(spec, &spectra)?;
            out.csr = Some(s);
            plots.csr = data;
        }
        if spec.wants(Diagnostic::SvRatios) {
            out.sv_ratios = Some(ratio_summary(spec, realizations)?);
        }
        if spec.wants(Diagnostic::Separability) {
            out.separability = Some(separability_summary(realizations)?);
        }
        if spec.wants(Diagnostic::BandCheck) {
            out.band_check = Some(band_summary(spec, realizations)?);
        }
        Ok((out, plots))
    };
    inner().map_err(CliError::Numerical)
}
