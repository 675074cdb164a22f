use super::step::{couple_step, CouplingRecord};
use crate::dynamics::{dist_h, SpectralState};
use crate::error::{Error, Result};
use crate::lab::Lab;

/// Full log of one coupling run.
#[derive(Debug, Clone)]
pub struct CouplingRun {
    pub records: Vec<CouplingRecord>,
    /// `u_0, u_1, …`; identical to a plain simulation of trajectory `run`.
    pub u_path: Vec<SpectralState>,
    pub v_path: Vec<SpectralState>,
    pub coalesced: bool,
}

impl CouplingRun {
    /// `‖u_k − v_k‖` for every stored time.
    pub fn distances(&self) -> Vec<f64> {
        self.u_path
            .iter()
            .zip(&self.v_path)
            .map(|(u, v)| dist_h(u, v).expect("paths share the grid"))
            .collect()
    }
}

/// Iterate [`couple_step`] for at most `horizon` steps (capped by the policy),
/// stopping after the first step entered at coalescence.
///
/// `u` is driven by the force of trajectory `run`; the independent copies come
/// from a separate stream, so `u` never sees the coupling.
pub fn run_coupling(lab: &Lab, u0: &SpectralState, v0: &SpectralState, run: u64, horizon: usize) -> Result<CouplingRun> {
    if horizon == 0 {
        return Err(Error::argument("coupling horizon must be at least 1"));
    }
    let steps = horizon.min(lab.policy().max_steps);
    let mut out = CouplingRun {
        records: Vec::with_capacity(steps),
        u_path: vec![u0.clone()],
        v_path: vec![v0.clone()],
        coalesced: false,
    };
    let mut u = u0.clone();
    let mut v = v0.clone();
    for k in 0..steps {
        let eta = lab.force(run, k as u64);
        let eta_indep = lab.independent_force(run, k as u64);
        let step = couple_step(lab, k, &u, &v, &eta, &eta_indep)?;
        let done = step.record.delta < lab.policy().coalesce_tol;
        out.records.push(step.record);
        u = step.u_next;
        v = step.v_next;
        out.u_path.push(u.clone());
        out.v_path.push(v.clone());
        if done {
            out.coalesced = true;
            break;
        }
    }
    Ok(out)
}
