//! Distance between the laws of two ensembles started from different points.

use rayon::prelude::*;
use serde::Serialize;

use super::observables::ObservableSet;
use super::stats::{fit_exponential, median, wasserstein1};
use crate::dynamics::SpectralState;
use crate::error::{Error, Result};
use crate::lab::Lab;

/// Smallest ensemble accepted by [`mixing_distance`].
pub const MIN_ENSEMBLE: usize = 100;

/// Rates are only reported with at least this fit quality.
pub const MIN_R2: f64 = 0.5;

#[derive(Debug, Clone, Serialize)]
pub struct MixRateReport {
    pub times: Vec<u64>,
    pub observables: Vec<String>,
    /// `per_observable[i][t]`: Wasserstein-1 distance for observable `i`.
    pub per_observable: Vec<Vec<f64>>,
    /// Maximum over observables.
    pub distance: Vec<f64>,
    /// Split-sample estimate of the Monte Carlo floor at each time.
    pub floor_series: Vec<f64>,
    /// Median of the floor series over the second half of the horizon.
    pub noise_floor: f64,
    pub rate: Option<f64>,
    pub r2: Option<f64>,
    pub fit_points: usize,
    pub inconclusive: bool,
    pub ensemble: usize,
}

/// Observable values along each trajectory: `[trajectory][time][observable]`.
fn ensemble_values(
    lab: &Lab,
    u0: &SpectralState,
    first_trajectory: u64,
    ensemble: usize,
    horizon: u64,
    observables: &ObservableSet,
) -> Result<Vec<Vec<Vec<f64>>>> {
    (0..ensemble as u64)
        .into_par_iter()
        .map(|i| {
            let mut rows = Vec::with_capacity(horizon as usize + 1);
            lab.simulate(u0, first_trajectory + i, 0, horizon, |_, u| rows.push(observables.eval(u)))?;
            Ok(rows)
        })
        .collect()
}

fn column(values: &[Vec<Vec<f64>>], t: usize, o: usize, pick: impl Fn(usize) -> bool) -> Vec<f64> {
    values
        .iter()
        .enumerate()
        .filter(|(i, _)| pick(*i))
        .map(|(_, v)| v[t][o])
        .collect()
}

/// Compare the law of `u(t; u01)` with that of `u(t; u02)` at integer times.
///
/// The first ensemble uses trajectories `0..P`, the second `offset..offset+P`;
/// `offset = 0` shares the noise between the two.
pub fn mixing_distance(
    lab: &Lab,
    u01: &SpectralState,
    u02: &SpectralState,
    ensemble: usize,
    horizon: u64,
    observables: &ObservableSet,
    offset: u64,
) -> Result<MixRateReport> {
    if ensemble < MIN_ENSEMBLE {
        return Err(Error::argument(format!("ensemble {ensemble} below the minimum {MIN_ENSEMBLE}")));
    }
    if horizon < 2 {
        return Err(Error::argument("mixing horizon must be at least 2"));
    }
    if offset != 0 && offset < ensemble as u64 {
        return Err(Error::argument("second ensemble offset must be 0 or at least the ensemble size"));
    }
    observables.check(lab.n_modes())?;
    let a = ensemble_values(lab, u01, 0, ensemble, horizon, observables)?;
    let b = ensemble_values(lab, u02, offset, ensemble, horizon, observables)?;
    let steps = horizon as usize + 1;
    let mut per_observable = vec![vec![0.0; steps]; observables.len()];
    let mut floor_series = vec![0.0; steps];
    for t in 0..steps {
        let mut split = 0.0f64;
        for (o, series) in per_observable.iter_mut().enumerate() {
            let all = |_| true;
            series[t] = wasserstein1(&column(&a, t, o, all), &column(&b, t, o, all))?;
            let even = |i: usize| i.is_multiple_of(2);
            let odd = |i: usize| !i.is_multiple_of(2);
            // halves are half as large, so their distance overstates the floor by √2
            let sa = wasserstein1(&column(&a, t, o, even), &column(&a, t, o, odd))?;
            let sb = wasserstein1(&column(&b, t, o, even), &column(&b, t, o, odd))?;
            split = split.max(0.5 * (sa + sb) / std::f64::consts::SQRT_2);
        }
        floor_series[t] = split;
    }
    let distance: Vec<f64> = (0..steps)
        .map(|t| per_observable.iter().map(|s| s[t]).fold(0.0, f64::max))
        .collect();
    let noise_floor = median(&floor_series[steps / 2..]).unwrap_or(0.0);

    // fit the leading stretch that stays clear of the Monte Carlo floor
    let cut = distance
        .iter()
        .position(|&d| d <= 2.0 * noise_floor)
        .unwrap_or(steps);
    let t: Vec<f64> = (0..cut).map(|s| s as f64).collect();
    let (rate, r2, fit_points, inconclusive) = match fit_exponential(&t, &distance[..cut], 0.0) {
        Ok(fit) if fit.r2 >= MIN_R2 => (Some(fit.rate), Some(fit.r2), fit.points, false),
        Ok(fit) => (None, Some(fit.r2), fit.points, true),
        Err(Error::Inconclusive(_)) => (None, None, cut, true),
        Err(e) => return Err(e),
    };
    Ok(MixRateReport {
        times: (0..=horizon).collect(),
        observables: observables.names(),
        per_observable,
        distance,
        floor_series,
        noise_floor,
        rate,
        r2,
        fit_points,
        inconclusive,
        ensemble,
    })
}
