//! Metropolis sampler for the planar Coulomb gas
//! `P(z) ∝ exp(β Σ_{i<j} ln|z_i − z_j| − N Σ_i |z_i|²)`.
//!
//! `β = 0` gives independent Gaussians and `β = 2` the GinUE eigenvalue law
//! (unit disk). Spacing samples taken from the bulk of recorded configurations
//! serve as references between the two limits.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{rescaled_spacings, UnfoldConfig, UnfoldedSpacings};
use crate::ensembles::{complex_gaussian, rng_for};
use crate::error::{invalid, Result};
use crate::C64;

/// Particles inside this quantile of the radii form the bulk.
pub const BULK_QUANTILE: f64 = 0.8;
/// Bulk spacings required for a reference sample.
pub const MIN_REFERENCE_SPACINGS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasConfig {
    pub n_particles: usize,
    pub beta: f64,
    /// Total sweeps, including burn-in. One sweep is one proposal per particle.
    pub sweeps: usize,
    pub burn_in: usize,
    pub thinning: usize,
    /// Standard deviation per coordinate of the Gaussian proposal.
    pub proposal_sigma: f64,
    pub seed: u64,
}

impl GasConfig {
    /// `N = 256`, 100 recorded configurations, proposal scale tuned for
    /// acceptance in `[0.2, 0.6]` at `β = 2`.
    pub fn new(beta: f64, seed: u64) -> Self {
        let n = 256;
        Self {
            n_particles: n,
            beta,
            sweeps: 700,
            burn_in: 200,
            thinning: 5,
            proposal_sigma: Self::default_sigma(n),
            seed,
        }
    }

    /// The typical interparticle distance `1/√N`.
    pub fn default_sigma(n: usize) -> f64 {
        1.0 / (n as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(invalid("n_particles must be at least 2"));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(invalid(format!("beta must be a finite nonnegative number, got {}", self.beta)));
        }
        if self.sweeps == 0 || self.thinning == 0 {
            return Err(invalid("sweeps and thinning must be positive"));
        }
        if self.burn_in >= self.sweeps {
            return Err(invalid(format!("burn_in ({}) must be below sweeps ({})", self.burn_in, self.sweeps)));
        }
        if !(self.proposal_sigma > 0.0) {
            return Err(invalid("proposal_sigma must be positive"));
        }
        Ok(())
    }

    /// Number of configurations [`sample_gas`] records.
    pub fn recorded(&self) -> usize {
        (self.sweeps - self.burn_in) / self.thinning
    }

    /// Unfolding used for gas references: the bulk trim replaces the
    /// default edge trim.
    pub fn bulk_unfolding(k_neighbors: usize) -> UnfoldConfig {
        UnfoldConfig { k_neighbors, trim: 1.0 - BULK_QUANTILE }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GasSamples {
    pub configurations: Vec<Vec<C64>>,
    /// Accepted / proposed moves after burn-in.
    pub acceptance: f64,
}

fn initial_positions<R: Rng>(n: usize, rng: &mut R) -> Vec<C64> {
    let v = 1.0 / n as f64;
    loop {
        let z: Vec<C64> = (0..n).map(|_| complex_gaussian(rng, v)).collect();
        let overlapping = (0..n).any(|i| (i + 1..n).any(|j| (z[i] - z[j]).norm() < 1e-12));
        if !overlapping {
            return z;
        }
    }
}

/// Energy change for moving particle `i` from `z[i]` to `to`.
fn delta_energy(z: &[C64], i: usize, to: C64, beta: f64, n: f64) -> f64 {
    let from = z[i];
    let mut log_ratio = 0.0;
    if beta != 0.0 {
        for (j, &w) in z.iter().enumerate() {
            if j != i {
                log_ratio += ((to - w).norm_sqr() / (from - w).norm_sqr()).ln();
            }
        }
    }
    -0.5 * beta * log_ratio + n * (to.norm_sqr() - from.norm_sqr())
}

pub fn sample_gas(config: &GasConfig) -> Result<GasSamples> {
    config.validate()?;
    let mut rng = rng_for(config.seed, 0);
    let n = config.n_particles;
    let mut z = initial_positions(n, &mut rng);
    let mut configurations = Vec::with_capacity(config.recorded());
    let (mut accepted, mut proposed) = (0u64, 0u64);
    for sweep in 0..config.sweeps {
        for i in 0..n {
            let dx: f64 = StandardNormal.sample(&mut rng);
            let dy: f64 = StandardNormal.sample(&mut rng);
            let to = z[i] + C64::new(dx, dy) * config.proposal_sigma;
            let de = delta_energy(&z, i, to, config.beta, n as f64);
            let u: f64 = rng.random();
            let accept = de <= 0.0 || u < (-de).exp();
            if accept {
                z[i] = to;
            }
            if sweep >= config.burn_in {
                proposed += 1;
                accepted += accept as u64;
            }
        }
        if sweep >= config.burn_in && (sweep + 1 - config.burn_in) % config.thinning == 0 {
            configurations.push(z.clone());
        }
    }
    let acceptance = if proposed > 0 { accepted as f64 / proposed as f64 } else { 0.0 };
    Ok(GasSamples { configurations, acceptance })
}

/// Unfolded bulk spacings pooled over all recorded configurations.
pub fn gas_spacing_reference(config: &GasConfig, unfold: UnfoldConfig) -> Result<UnfoldedSpacings> {
    config.validate()?;
    let n = config.n_particles;
    let per_config = ((1.0 - unfold.trim) * n as f64).round() as usize;
    let expected = per_config * config.recorded();
    if expected < MIN_REFERENCE_SPACINGS {
        let needed_records = MIN_REFERENCE_SPACINGS.div_ceil(per_config.max(1));
        let needed_sweeps = config.burn_in + needed_records * config.thinning;
        return Err(invalid(format!(
            "gas reference would hold {expected} spacings, below {MIN_REFERENCE_SPACINGS}; \
             increase sweeps to at least {needed_sweeps}"
        )));
    }
    let samples = sample_gas(config)?;
    let mut pooled = Vec::with_capacity(expected);
    for c in &samples.configurations {
        pooled.extend(rescaled_spacings(c, unfold)?);
    }
    let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
    pooled.iter_mut().for_each(|s| *s /= mean);
    Ok(UnfoldedSpacings { spacings: pooled, k_neighbors: unfold.k_neighbors, trim: unfold.trim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{ks_distance, reference_pdf, ReferenceKind};

    #[test]
    fn beta_zero_is_gaussian() {
        let mut cfg = GasConfig::new(0.0, 3);
        cfg.sweeps = 1200;
        let s = sample_gas(&cfg).unwrap();
        let (mut m2, mut count) = (0.0, 0.0);
        for c in &s.configurations {
            for z in c {
                m2 += z.norm_sqr();
                count += 1.0;
            }
        }
        // E|z|² = 2 · 1/(2N)
        let expected = 1.0 / cfg.n_particles as f64;
        assert!((m2 / count / expected - 1.0).abs() < 0.02, "{}", m2 / count / expected);
    }

    #[test]
    fn acceptance_at_default_sigma() {
        let s = sample_gas(&GasConfig { sweeps: 300, burn_in: 100, ..GasConfig::new(2.0, 1) }).unwrap();
        assert!((0.2..=0.6).contains(&s.acceptance), "{}", s.acceptance);
    }

    #[test]
    fn seeds_are_deterministic() {
        let cfg = GasConfig { n_particles: 16, sweeps: 50, burn_in: 10, ..GasConfig::new(1.6, 8) };
        assert_eq!(sample_gas(&cfg).unwrap(), sample_gas(&cfg).unwrap());
        let other = GasConfig { seed: 9, ..cfg.clone() };
        assert_ne!(sample_gas(&cfg).unwrap(), sample_gas(&other).unwrap());
    }

    #[test]
    fn two_particle_stationary_law() {
        // For N = 2 the separation d = z1 − z2 has density ∝ |d|^β e^{−|d|²},
        // so r = |d| has density ∝ r^{β+1} e^{−r²}.
        let beta = 2.0;
        let cfg = GasConfig {
            n_particles: 2,
            beta,
            sweeps: 400_000,
            burn_in: 1000,
            thinning: 1,
            proposal_sigma: 0.6,
            seed: 12,
        };
        let s = sample_gas(&cfg).unwrap();
        let edges: Vec<f64> = (0..=12).map(|k| k as f64 * 0.25).collect();
        let mut hist = vec![0.0; 12];
        for c in &s.configurations {
            let r = (c[0] - c[1]).norm();
            if let Some(b) = edges.windows(2).position(|w| r >= w[0] && r < w[1]) {
                hist[b] += 1.0;
            }
        }
        let total: f64 = s.configurations.len() as f64;
        // Γ(2, r²) closed form: ∫ r³ e^{−r²} ∝ 1 − (1 + r²)e^{−r²}
        let cdf = |r: f64| 1.0 - (1.0 + r * r) * (-r * r).exp();
        let tv: f64 = 0.5
            * edges
                .windows(2)
                .zip(&hist)
                .map(|(w, h)| (h / total - (cdf(w[1]) - cdf(w[0]))).abs())
                .sum::<f64>();
        assert!(tv < 0.02, "{tv}");
    }

    #[test]
    fn insufficient_sweeps_are_reported() {
        let cfg = GasConfig { sweeps: 250, ..GasConfig::new(2.0, 1) };
        let err = gas_spacing_reference(&cfg, GasConfig::bulk_unfolding(30)).unwrap_err().to_string();
        assert!(err.contains("increase sweeps to at least"), "{err}");
    }

    #[test]
    fn limits_and_interpolation() {
        let unfold = GasConfig::bulk_unfolding(30);
        let poisson = gas_spacing_reference(&GasConfig::new(0.0, 21), unfold).unwrap();
        let ginibre = gas_spacing_reference(&GasConfig::new(2.0, 22), unfold).unwrap();
        assert!(poisson.spacings.len() >= MIN_REFERENCE_SPACINGS);
        assert!(ks_distance(&poisson.spacings, ReferenceKind::Poisson2d).unwrap() <= 0.05);
        assert!(ks_distance(&ginibre.spacings, ReferenceKind::Ginibre).unwrap() <= 0.05);

        let mid = gas_spacing_reference(&GasConfig::new(1.6, 23), unfold).unwrap();
        let mode_height = |s: &[f64]| {
            let bins = 40;
            let mut h = vec![0.0; bins];
            for &x in s {
                if x < 3.0 {
                    h[(x / 3.0 * bins as f64) as usize] += 1.0;
                }
            }
            h.iter().cloned().fold(0.0, f64::max) / s.len() as f64 / (3.0 / bins as f64)
        };
        let peak = |k| (1..400).map(|i| reference_pdf(k, i as f64 * 0.01).unwrap()).fold(0.0, f64::max);
        let h = mode_height(&mid.spacings);
        assert!(h > peak(ReferenceKind::Poisson2d) && h < peak(ReferenceKind::Ginibre), "{h}");
    }
}
