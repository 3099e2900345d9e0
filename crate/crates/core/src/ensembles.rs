//! Random reference ensembles: GinUE matrices and uncorrelated point clouds.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::spectral_core::{eigenvalues, ComplexSpectrum};
use crate::C64;

/// Deterministic generator for `(seed, stream)`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian scaled so that `E|z|² = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(s * re, s * im)
}

/// `n×n` GinUE matrix with `E|M_ij|² = 1/n`; its spectrum fills the unit disk.
pub fn ginue_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat<C64> {
    let v = 1.0 / n as f64;
    let mut m = Mat::<C64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] = complex_gaussian(rng, v);
        }
    }
    m
}

/// Spectrum of the `index`-th GinUE draw for `seed`.
pub fn ginue_spectrum(n: usize, seed: u64, index: u64) -> Result<ComplexSpectrum> {
    let m = ginue_matrix(n, &mut rng_for(seed, index));
    Ok(eigenvalues(m.as_ref())?.with_source("ginue"))
}

/// `n` i.i.d. points uniform on the unit disk.
pub fn uniform_disk<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let r = rng.random::<f64>().sqrt();
            let t = std::f64::consts::TAU * rng.random::<f64>();
            C64::from_polar(r, t)
        })
        .collect()
}

/// Sorted partial sums of `n` i.i.d. unit exponentials, a Poisson level sequence.
pub fn poisson_levels<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            let e: f64 = rand_distr::Exp1.sample(rng);
            x += e;
            x
        })
        .collect()
}
