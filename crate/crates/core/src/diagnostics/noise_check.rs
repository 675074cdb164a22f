use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::stats::ks_one_sample;
use crate::error::{Error, Result};
use crate::noise::{orthonormality_defect, sample_donsker, RedNoiseSpec};
use crate::rng::{stream, StreamDomain};

/// Deepest level used by the orthonormality check.
const ORTHO_LEVEL: u32 = 6;

#[derive(Debug, Clone, Serialize)]
pub struct NoiseCheckReport {
    pub orthonormality_levels: u32,
    pub orthonormality_defect: f64,
    pub paths: usize,
    pub sup_bound: f64,
    /// Largest `sup_t |η(t)|` over the sampled paths.
    pub max_sup: f64,
    pub bound_violations: usize,
    /// Bound on the sup of the discarded levels `> K`.
    pub truncation_bound: f64,
    pub donsker_n: usize,
    pub donsker_samples: usize,
    /// KS distance of `β_N(1)/(c₀ σ)` to the standard normal, `σ²` the draw variance.
    pub donsker_ks: f64,
    pub donsker_variance: f64,
    pub donsker_target_variance: f64,
}

/// Orthonormality of the Haar basis, boundedness of sampled paths, and the
/// Gaussian limit of the rescaled noise integral.
pub fn noise_check(spec: &RedNoiseSpec, seed: u64, paths: usize, donsker_n: usize, donsker_samples: usize) -> Result<NoiseCheckReport> {
    if paths == 0 || donsker_samples == 0 {
        return Err(Error::argument("noise check needs at least one path and one Donsker sample"));
    }
    let levels = ORTHO_LEVEL;
    let defect = orthonormality_defect(levels);
    let bound = spec.sup_bound();
    let sups: Vec<f64> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = spec.sample(&mut stream(seed, StreamDomain::Samples, i, 0), 0);
            path.cell_values().iter().fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .collect();
    let betas: Vec<f64> = (0..donsker_samples as u64)
        .into_par_iter()
        .map(|s| sample_donsker(spec, seed, s, donsker_n, 1.0))
        .collect::<Result<_>>()?;
    let c0 = spec.coefficients()[0];
    let target = c0 * c0 * spec.density().second_moment();
    let scale = target.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let scaled: Vec<f64> = betas.iter().map(|b| b / scale).collect();
    let ks = ks_one_sample(&scaled, |x| normal.cdf(x))?;
    let mean = betas.iter().sum::<f64>() / betas.len() as f64;
    let variance = betas.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / betas.len() as f64;
    Ok(NoiseCheckReport {
        orthonormality_levels: levels,
        orthonormality_defect: defect,
        paths,
        sup_bound: bound,
        max_sup: sups.iter().copied().fold(0.0, f64::max),
        bound_violations: sups.iter().filter(|&&s| s > bound).count(),
        truncation_bound: spec.truncation_bound(),
        donsker_n,
        donsker_samples,
        donsker_ks: ks,
        donsker_variance: variance,
        donsker_target_variance: target,
    })
}
