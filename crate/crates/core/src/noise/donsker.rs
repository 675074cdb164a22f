//! Rescaled integral of a red noise, `β_N(T) = N^{-1/2} ∫₀^{NT} η(t) dt`.

use super::path::{HaarNoisePath, RedNoiseSpec};
use crate::error::{Error, Result};
use crate::rng::{stream, StreamDomain};

/// `β_N(T)` for a noise given as consecutive unit-segment paths.
pub fn donsker_process(paths: &[HaarNoisePath], n: usize, horizon: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::argument("Donsker scale N must be positive"));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::argument(format!("horizon {horizon} must be finite and nonnegative")));
    }
    let end = n as f64 * horizon;
    let segments = end.ceil() as usize;
    if paths.len() < segments {
        return Err(Error::argument(format!(
            "need {segments} unit segments of noise, got {}",
            paths.len()
        )));
    }
    let full = end.floor() as usize;
    let mut integral: f64 = paths[..full].iter().map(|p| p.integral_to(1.0)).sum();
    if segments > full {
        integral += paths[full].integral_to(end - full as f64);
    }
    Ok(integral / (n as f64).sqrt())
}

/// One sample of `β_N(T)`, drawing each unit segment from its own stream.
///
/// Equivalent to sampling the segments into a vector and calling
/// [`donsker_process`], without holding all of them at once.
pub fn sample_donsker(spec: &RedNoiseSpec, master: u64, sample: u64, n: usize, horizon: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::argument("Donsker scale N must be positive"));
    }
    let end = n as f64 * horizon;
    let segments = end.ceil() as u64;
    let full = end.floor() as u64;
    let mut integral = 0.0;
    let c0 = spec.coefficients()[0];
    for seg in 0..segments {
        let mut rng = stream(master, StreamDomain::Paths, sample, seg);
        integral += if seg < full {
            // dipoles integrate to zero over the segment and ξ₀₀ is drawn first
            c0 * spec.density().sample(&mut rng)
        } else {
            spec.sample(&mut rng, seg).integral_to(end - full as f64)
        };
    }
    Ok(integral / (n as f64).sqrt())
}
