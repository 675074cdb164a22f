//! Numerical checks of the absorbing-set, zero-stability and linearized
//! controllability hypotheses.

use rayon::prelude::*;
use serde::Serialize;

use super::stats::{linear_fit, median};
use crate::dynamics::SpectralState;
use crate::error::{Error, Result};
use crate::lab::Lab;
use crate::rng::StreamDomain;

#[derive(Debug, Clone, Serialize)]
pub struct AbsorbingReport {
    /// `sup ‖u(t)‖` over the ensemble after each trajectory has entered;
    /// infinite when a trajectory blew up.
    pub radius: f64,
    /// Entry threshold: the largest norm seen in the second half of the horizon.
    pub threshold: f64,
    pub initial_norms: Vec<f64>,
    /// Per initial condition: latest entry time over the noise realizations.
    pub entry_times: Vec<u64>,
    /// Per initial condition: `sup ‖u(t)‖` after entry.
    pub radii: Vec<f64>,
    /// Largest `(Σ k²|u_k|²)^{1/2}` after entry, a proxy for the compact regularity.
    pub max_sobolev: f64,
    pub trajectories: usize,
    /// Trajectories that became non-finite, with the time of failure.
    pub blow_ups: Vec<f64>,
}

impl AbsorbingReport {
    /// `max/min − 1` over the per-initial-condition radii.
    pub fn radius_spread(&self) -> f64 {
        let max = self.radii.iter().copied().fold(0.0, f64::max);
        let min = self.radii.iter().copied().fold(f64::INFINITY, f64::min);
        max / min - 1.0
    }

    pub fn passed(&self, spread: f64) -> bool {
        self.blow_ups.is_empty() && self.radius.is_finite() && self.radius_spread() <= spread
    }
}

/// Norm and Sobolev-norm series of one run, or the blow-up time.
type RunOutcome = std::result::Result<(Vec<f64>, Vec<f64>), f64>;

/// Run every initial condition under `noises` forcing realizations for
/// `horizon` units. Realization `r` is shared across initial conditions.
pub fn verify_absorbing(lab: &Lab, initial: &[SpectralState], noises: usize, horizon: u64) -> Result<AbsorbingReport> {
    if initial.is_empty() || noises == 0 || horizon < 2 {
        return Err(Error::argument("absorbing check needs initial data, realizations and a horizon >= 2"));
    }
    let jobs: Vec<(usize, usize)> = (0..initial.len()).flat_map(|i| (0..noises).map(move |r| (i, r))).collect();
    let runs: Vec<RunOutcome> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let mut norms = Vec::with_capacity(horizon as usize + 1);
            let mut sob = Vec::with_capacity(horizon as usize + 1);
            match lab.simulate(&initial[i], r as u64, 0, horizon, |_, u| {
                norms.push(u.norm());
                sob.push(u.sobolev_norm());
            }) {
                Ok(_) => Ok(Ok((norms, sob))),
                Err(Error::BlowUp { time, .. }) => Ok(Err(time)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let blow_ups: Vec<f64> = runs.iter().filter_map(|r| r.as_ref().err().copied()).collect();
    let half = horizon as usize / 2;
    let threshold = runs
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .flat_map(|(n, _)| n[half..].iter().copied())
        .fold(0.0, f64::max);
    let mut entry_times = vec![0u64; initial.len()];
    let mut radii = vec![0.0f64; initial.len()];
    let mut max_sobolev = 0.0f64;
    for (&(i, _), run) in jobs.iter().zip(&runs) {
        let Ok((norms, sob)) = run else {
            radii[i] = f64::INFINITY;
            entry_times[i] = horizon;
            continue;
        };
        let entry = norms.iter().position(|&x| x <= threshold).unwrap_or(norms.len() - 1);
        entry_times[i] = entry_times[i].max(entry as u64);
        radii[i] = radii[i].max(norms[entry..].iter().copied().fold(0.0, f64::max));
        max_sobolev = max_sobolev.max(sob[entry..].iter().copied().fold(0.0, f64::max));
    }
    Ok(AbsorbingReport {
        radius: radii.iter().copied().fold(0.0, f64::max),
        threshold,
        initial_norms: initial.iter().map(SpectralState::norm).collect(),
        entry_times,
        radii,
        max_sobolev,
        trajectories: jobs.len(),
        blow_ups,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroStabilityReport {
    /// Slope of `log ‖u(t)‖` over the fit window, per initial condition.
    pub rates: Vec<f64>,
    pub min_rate: f64,
    pub median_rate: f64,
    /// Whether `‖u‖` never increased along the integer grid, per initial condition.
    pub monotone: Vec<bool>,
    pub fit_start: u64,
    pub horizon: u64,
}

/// Unforced decay: integrate each initial condition with zero noise and fit
/// the log-norm over `[fit_start, horizon]`.
pub fn verify_zero_stability(lab: &Lab, initial: &[SpectralState], fit_start: u64, horizon: u64) -> Result<ZeroStabilityReport> {
    if initial.is_empty() || fit_start + 2 > horizon {
        return Err(Error::argument("zero-stability check needs initial data and a fit window of at least 3 points"));
    }
    let zero = lab.forcing().zero_profile();
    let solver = lab.solver();
    let per: Vec<(f64, bool)> = initial
        .par_iter()
        .map(|u0| {
            let mut u = u0.clone();
            let mut norms = vec![u.norm()];
            for seg in 0..horizon {
                u = solver.shift(&u, &zero).map_err(|e| match e {
                    Error::BlowUp { time, detail } => Error::BlowUp { time: time + seg as f64, detail },
                    other => other,
                })?;
                norms.push(u.norm());
            }
            if norms[fit_start as usize..].iter().any(|&x| !(x > 0.0)) {
                return Err(Error::Numerical("trajectory reached exactly zero; no decay rate".into()));
            }
            let t: Vec<f64> = (fit_start..=horizon).map(|s| s as f64).collect();
            let y: Vec<f64> = norms[fit_start as usize..].iter().map(|x| x.ln()).collect();
            let fit = linear_fit(&t, &y)?;
            // relative slack absorbs roundoff in norms that are flat to machine precision
            let monotone = norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
            Ok((fit.slope, monotone))
        })
        .collect::<Result<_>>()?;
    let rates: Vec<f64> = per.iter().map(|p| p.0).collect();
    Ok(ZeroStabilityReport {
        min_rate: rates.iter().copied().fold(f64::INFINITY, f64::min),
        median_rate: median(&rates).unwrap_or(f64::NAN),
        rates,
        monotone: per.iter().map(|p| p.1).collect(),
        fit_start,
        horizon,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RankScanReport {
    /// Singular values per sample, descending.
    pub singular_values: Vec<Vec<f64>>,
    /// Count of singular values above `1e-8·σ_max`, per sample.
    pub ranks: Vec<usize>,
    /// Number of resolved real components, the largest possible rank.
    pub full_rank: usize,
    pub full_rank_fraction: f64,
}

/// Relative threshold for the effective rank.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Singular values of `D_η S(u, η⃗)` at `samples` points `u` taken after
/// `burn_in` units from zero, with fresh noise for each sample.
pub fn h3_rank_scan(lab: &Lab, samples: usize, burn_in: u64) -> Result<RankScanReport> {
    if samples == 0 {
        return Err(Error::argument("rank scan needs at least one sample"));
    }
    let zero = SpectralState::zeros(lab.n_modes())?;
    let lin = *lab.linearization();
    let svs: Vec<Vec<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let u = lab.burn_in(&zero, s, burn_in)?;
            let eta = lab
                .forcing()
                .sample_stream(lab.seed(), StreamDomain::Initial, s, 1);
            Ok(lab.solver().build_linearized_at(&u, &eta, &lin)?.singular_values())
        })
        .collect::<Result<_>>()?;
    let full_rank = 2 * lin.n_resolved;
    let ranks: Vec<usize> = svs
        .iter()
        .map(|s| {
            let top = s.first().copied().unwrap_or(0.0);
            s.iter().filter(|&&x| top > 0.0 && x > RANK_THRESHOLD * top).count()
        })
        .collect();
    let full = ranks.iter().filter(|&&r| r == full_rank).count();
    Ok(RankScanReport {
        singular_values: svs,
        full_rank_fraction: full as f64 / samples as f64,
        ranks,
        full_rank,
    })
}
