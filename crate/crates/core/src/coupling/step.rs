use std::fmt;

use serde::Serialize;

use super::homological::solve_homological;
use crate::dynamics::{dist_h, CglSolver, SpectralState};
use crate::error::{Error, Result};
use crate::lab::Lab;
use crate::noise::{weighted_norm, ForceProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Independent,
    Homological,
    Trivial,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Independent => "independent",
            Branch::Homological => "homological",
            Branch::Trivial => "trivial",
        })
    }
}

/// Log entry of one coupling step. `delta` is the distance at entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingRecord {
    pub k: usize,
    pub branch: Branch,
    pub delta: f64,
    pub residual: Option<f64>,
    /// `δ‖Φ‖` in the norm of the noise space.
    pub phi_norm: Option<f64>,
    pub guard_violation: bool,
}

/// Test hooks for [`couple_step_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepOptions {
    /// Replace the homological solution by `Φ = 0` and accept it regardless of residual.
    pub zero_phi: bool,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub u_next: SpectralState,
    pub v_next: SpectralState,
    pub record: CouplingRecord,
    /// Nominal and perturbed embedded draws when the homological branch fired.
    pub draws: Option<(Vec<f64>, Vec<f64>)>,
}

/// `δ⁻¹(S(v₀, η⃗) − S(u₀, η⃗))` with `δ = ‖u₀ − v₀‖`.
pub fn s_delta(solver: &CglSolver, u0: &SpectralState, v0: &SpectralState, force: &ForceProfile) -> Result<SpectralState> {
    let delta = dist_h(u0, v0)?;
    if delta == 0.0 {
        return Err(Error::Degenerate("s_delta needs distinct states".into()));
    }
    let su = solver.shift(u0, force)?;
    let sv = solver.shift(v0, force)?;
    Ok(sv.sub(&su)?.scaled(1.0 / delta))
}

/// One step of the coupling with fresh noise `eta` for `u` and the
/// independent copy `eta_indep` used when the pair is far apart.
pub fn couple_step(
    lab: &Lab,
    k: usize,
    u: &SpectralState,
    v: &SpectralState,
    eta: &ForceProfile,
    eta_indep: &ForceProfile,
) -> Result<StepOutcome> {
    couple_step_with(lab, k, u, v, eta, eta_indep, StepOptions::default())
}

pub fn couple_step_with(
    lab: &Lab,
    k: usize,
    u: &SpectralState,
    v: &SpectralState,
    eta: &ForceProfile,
    eta_indep: &ForceProfile,
    options: StepOptions,
) -> Result<StepOutcome> {
    let solver = lab.solver();
    let policy = lab.policy();
    let delta = dist_h(u, v)?;
    let mut record = CouplingRecord {
        k,
        branch: Branch::Trivial,
        delta,
        residual: None,
        phi_norm: None,
        guard_violation: false,
    };

    if delta < policy.coalesce_tol || (delta == 0.0 && policy.coalesce_tol == 0.0) {
        let u_next = solver.shift(u, eta)?;
        let v_next = solver.shift(v, eta)?;
        return Ok(StepOutcome { u_next, v_next, record, draws: None });
    }
    if delta > policy.delta0 {
        record.branch = Branch::Independent;
        let u_next = solver.shift(u, eta)?;
        let v_next = solver.shift(v, eta_indep)?;
        return Ok(StepOutcome { u_next, v_next, record, draws: None });
    }

    let traj = solver.shift_with_trajectory(u, eta)?;
    let sv = solver.shift(v, eta)?;
    let lin = lab.linearization();
    let sd = sv.sub(traj.end())?.scaled(1.0 / delta);
    let d = solver.build_linearized(&traj, eta, lin)?;
    // linearizing S(v, η + δΦ) − S(u, η) = 0 gives DΦ = −S^Δ
    let rhs: Vec<f64> = sd.resolved_components(lin.n_resolved)?.iter().map(|x| -x).collect();
    let mut sol = solve_homological(d.matrix(), &rhs, policy.lambda_reg)?;
    if options.zero_phi {
        sol.phi.iter_mut().for_each(|x| *x = 0.0);
    }
    record.residual = Some(sol.residual);
    let weights = eta.embedding_weights(lin.k_ctl)?;
    record.phi_norm = Some(delta * weighted_norm(&sol.phi, &weights));

    let nominal = eta.embed(lin.k_ctl)?;
    let perturbed: Vec<f64> = nominal.iter().zip(&sol.phi).map(|(x, p)| x + delta * p).collect();
    record.guard_violation = perturbed.iter().any(|x| x.abs() > policy.xi_max);

    let accepted = (options.zero_phi || sol.residual <= policy.rho_max) && !record.guard_violation;
    let u_next = traj.into_end();
    if !accepted {
        return Ok(StepOutcome { u_next, v_next: sv, record, draws: None });
    }
    record.branch = Branch::Homological;
    let eta_prime = eta.with_embedded(lin.k_ctl, &perturbed)?;
    let v_next = solver.shift(v, &eta_prime)?;
    Ok(StepOutcome {
        u_next,
        v_next,
        record,
        draws: Some((nominal, perturbed)),
    })
}
