//! Statistics of single coupling steps started at a prescribed distance.

use rayon::prelude::*;
use serde::Serialize;

use super::stats::{ks_two_sample, linear_fit, median};
use crate::coupling::{couple_step_with, Branch, CouplingPolicy, CouplingRecord, StepOptions};
use crate::dynamics::{dist_h, SpectralState};
use crate::error::{Error, Result};
use crate::lab::Lab;

/// Base points for single-step experiments: a state from the absorbing set
/// and a unit direction in the resolved modes.
#[derive(Debug, Clone)]
pub struct BasePoint {
    pub sample: u64,
    pub state: SpectralState,
    pub direction: SpectralState,
}

/// `count` base points, each burned in from zero for `burn_in` units.
pub fn base_points(lab: &Lab, count: usize, burn_in: u64) -> Result<Vec<BasePoint>> {
    let zero = SpectralState::zeros(lab.n_modes())?;
    (0..count as u64)
        .into_par_iter()
        .map(|s| {
            Ok(BasePoint {
                sample: s,
                state: lab.burn_in(&zero, s, burn_in)?,
                direction: lab.random_direction(s)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct StepSample {
    pub record: CouplingRecord,
    /// `‖u₁ − v₁‖ / δ`.
    pub ratio: f64,
    pub draws: Option<(Vec<f64>, Vec<f64>)>,
}

/// One coupling step from every base point with `v₀ = u₀ + δ·direction`.
pub fn coupled_steps(lab: &Lab, bases: &[BasePoint], delta: f64, options: StepOptions) -> Result<Vec<StepSample>> {
    if !(delta > 0.0) {
        return Err(Error::argument(format!("separation {delta} must be positive")));
    }
    bases
        .par_iter()
        .map(|b| {
            let mut v = b.state.clone();
            v.axpy(delta, &b.direction)?;
            let eta = lab.force(b.sample, 0);
            let indep = lab.independent_force(b.sample, 0);
            let out = couple_step_with(lab, 0, &b.state, &v, &eta, &indep, options)?;
            let ratio = dist_h(&out.u_next, &out.v_next)? / out.record.delta;
            Ok(StepSample {
                record: out.record,
                ratio,
                draws: out.draws,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub delta: f64,
    pub samples: usize,
    pub fired: usize,
    /// Homological steps with `‖u₁ − v₁‖ ≤ δ/2`.
    pub contracted: usize,
    pub fraction: f64,
    pub guard_violations: usize,
    pub residual_rejections: usize,
    pub median_ratio: Option<f64>,
    /// Contraction ratios of the homological steps.
    pub ratios: Vec<f64>,
}

/// Same model with the case threshold at least `delta`, so that a separation
/// equal to the threshold is not pushed over it by rounding.
fn coupled_lab(lab: &Lab, delta: f64) -> Result<Lab> {
    let policy = CouplingPolicy {
        delta0: lab.policy().delta0.max(delta * (1.0 + 1e-9)),
        ..lab.policy().clone()
    };
    lab.with_policy(policy)
}

/// How often a homological step halves the distance.
pub fn contraction_scan(lab: &Lab, bases: &[BasePoint], delta: f64) -> Result<ContractionReport> {
    let steps = coupled_steps(&coupled_lab(lab, delta)?, bases, delta, StepOptions::default())?;
    let ratios: Vec<f64> = steps
        .iter()
        .filter(|s| s.record.branch == Branch::Homological)
        .map(|s| s.ratio)
        .collect();
    let contracted = ratios.iter().filter(|&&r| r <= 0.5).count();
    Ok(ContractionReport {
        delta,
        samples: steps.len(),
        fired: ratios.len(),
        contracted,
        fraction: if ratios.is_empty() { 0.0 } else { contracted as f64 / ratios.len() as f64 },
        guard_violations: steps.iter().filter(|s| s.record.guard_violation).count(),
        residual_rejections: steps
            .iter()
            .filter(|s| s.record.branch == Branch::Trivial && !s.record.guard_violation)
            .count(),
        median_ratio: median(&ratios),
        ratios,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginalLawReport {
    pub deltas: Vec<f64>,
    /// KS distance between pooled perturbed and nominal draws; `None` when flagged.
    pub ks: Vec<Option<f64>>,
    pub fired: Vec<usize>,
    pub pooled: Vec<usize>,
    /// Grid points where the homological branch never fired.
    pub flagged: Vec<bool>,
    /// KS strictly decreases as δ decreases.
    pub monotone: bool,
    /// Slope of `log KS` against `log δ`.
    pub power: Option<f64>,
    pub power_r2: Option<f64>,
    /// Median `‖u₁ − v₁‖/δ` on the homological branch.
    pub median_ratio: Vec<Option<f64>>,
    /// Slope of `log ‖u₁ − v₁‖` against `log δ`; measured, never asserted.
    pub contraction_exponent: Option<f64>,
}

/// Empirical distance between the law of the perturbed draws `ξ' = ξ + δΦ`
/// and that of the nominal draws `ξ`, over a grid of separations.
///
/// Every δ reuses the same base points and noise. The case threshold is raised
/// to the largest δ so that no grid point drops to the independent branch.
pub fn marginal_law_distance(lab: &Lab, bases: &[BasePoint], deltas: &[f64], options: StepOptions) -> Result<MarginalLawReport> {
    if deltas.is_empty() {
        return Err(Error::argument("empty separation grid"));
    }
    let lab = coupled_lab(lab, deltas.iter().copied().fold(0.0, f64::max))?;
    let mut ks = Vec::with_capacity(deltas.len());
    let mut fired = Vec::with_capacity(deltas.len());
    let mut pooled = Vec::with_capacity(deltas.len());
    let mut median_ratio = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let steps = coupled_steps(&lab, bases, delta, options)?;
        let (mut nominal, mut perturbed) = (Vec::new(), Vec::new());
        let mut ratios = Vec::new();
        for s in &steps {
            if let Some((n, p)) = &s.draws {
                nominal.extend_from_slice(n);
                perturbed.extend_from_slice(p);
                ratios.push(s.ratio);
            }
        }
        fired.push(ratios.len());
        pooled.push(nominal.len());
        median_ratio.push(median(&ratios));
        ks.push(if nominal.is_empty() { None } else { Some(ks_two_sample(&perturbed, &nominal)?) });
    }
    let flagged: Vec<bool> = ks.iter().map(Option::is_none).collect();

    let mut order: Vec<usize> = (0..deltas.len()).filter(|&i| !flagged[i]).collect();
    order.sort_by(|&a, &b| deltas[b].total_cmp(&deltas[a]));
    let monotone = order.len() == deltas.len()
        && order.windows(2).all(|w| ks[w[1]].unwrap() < ks[w[0]].unwrap());

    let usable: Vec<usize> = order.iter().copied().filter(|&i| ks[i].unwrap() > 0.0).collect();
    let (power, power_r2) = if usable.len() >= 2 {
        let x: Vec<f64> = usable.iter().map(|&i| deltas[i].ln()).collect();
        let y: Vec<f64> = usable.iter().map(|&i| ks[i].unwrap().ln()).collect();
        let fit = linear_fit(&x, &y)?;
        (Some(fit.slope), Some(fit.r2))
    } else {
        (None, None)
    };
    let with_ratio: Vec<usize> = (0..deltas.len())
        .filter(|&i| median_ratio[i].is_some_and(|r| r > 0.0))
        .collect();
    let contraction_exponent = if with_ratio.len() >= 2 {
        let x: Vec<f64> = with_ratio.iter().map(|&i| deltas[i].ln()).collect();
        let y: Vec<f64> = with_ratio
            .iter()
            .map(|&i| (median_ratio[i].unwrap() * deltas[i]).ln())
            .collect();
        Some(linear_fit(&x, &y)?.slope)
    } else {
        None
    };
    Ok(MarginalLawReport {
        deltas: deltas.to_vec(),
        ks,
        fired,
        pooled,
        flagged,
        monotone,
        power,
        power_r2,
        median_ratio,
        contraction_exponent,
    })
}
