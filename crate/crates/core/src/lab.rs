//! The assembled model: solver, forcing law, seed, and the truncation and
//! coupling settings every experiment shares.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::coupling::CouplingPolicy;
use crate::dynamics::{CglParams, CglSolver, LinearizationConfig, SpectralState};
use crate::error::{Error, Result};
use crate::noise::{ForceProfile, ForcingSpec};
use crate::rng::{stream, StreamDomain};

#[derive(Debug)]
pub struct Lab {
    solver: CglSolver,
    forcing: ForcingSpec,
    seed: u64,
    linearization: LinearizationConfig,
    policy: CouplingPolicy,
}

impl Lab {
    pub fn new(
        params: CglParams,
        forcing: ForcingSpec,
        seed: u64,
        linearization: LinearizationConfig,
        policy: CouplingPolicy,
    ) -> Result<Self> {
        policy.validate()?;
        let solver = CglSolver::new(params)?;
        let n = solver.n_modes();
        for &k in forcing.modes() {
            if SpectralState::index_of(n, k).is_none() {
                return Err(Error::config(format!("forced mode {k} not representable with {n} modes")));
            }
        }
        if !forcing.modes().is_empty() && forcing.noise().levels() + 1 > solver.params().dt_log2 {
            return Err(Error::config(format!(
                "grid.dt_log2 = {} must be at least noise.K + 1 = {}",
                solver.params().dt_log2,
                forcing.noise().levels() + 1
            )));
        }
        linearization.validate(n, &forcing.zero_profile())?;
        Ok(Self {
            solver,
            forcing,
            seed,
            linearization,
            policy,
        })
    }

    pub fn solver(&self) -> &CglSolver {
        &self.solver
    }

    pub fn params(&self) -> &CglParams {
        self.solver.params()
    }

    pub fn forcing(&self) -> &ForcingSpec {
        &self.forcing
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn linearization(&self) -> &LinearizationConfig {
        &self.linearization
    }

    pub fn policy(&self) -> &CouplingPolicy {
        &self.policy
    }

    pub fn n_modes(&self) -> usize {
        self.solver.n_modes()
    }

    /// Same model with another coupling policy.
    pub fn with_policy(&self, policy: CouplingPolicy) -> Result<Lab> {
        Lab::new(self.params().clone(), self.forcing.clone(), self.seed, self.linearization, policy)
    }

    /// Same model with another forcing law.
    pub fn with_forcing(&self, forcing: ForcingSpec) -> Result<Lab> {
        Lab::new(self.params().clone(), forcing, self.seed, self.linearization, self.policy.clone())
    }

    /// Same model with other solver parameters.
    pub fn with_params(&self, params: CglParams) -> Result<Lab> {
        Lab::new(params, self.forcing.clone(), self.seed, self.linearization, self.policy.clone())
    }

    /// Forcing of trajectory `trajectory` on `[segment, segment + 1)`.
    pub fn force(&self, trajectory: u64, segment: u64) -> ForceProfile {
        self.forcing.sample_stream(self.seed, StreamDomain::Force, trajectory, segment)
    }

    /// An independent copy of [`force`](Self::force) for the same slot.
    pub fn independent_force(&self, trajectory: u64, segment: u64) -> ForceProfile {
        self.forcing
            .sample_stream(self.seed, StreamDomain::IndependentCopy, trajectory, segment)
    }

    /// Integrate `units` unit segments starting at `first_segment`, calling
    /// `observe(t, state)` at every integer time including the start.
    pub fn simulate(
        &self,
        u0: &SpectralState,
        trajectory: u64,
        first_segment: u64,
        units: u64,
        mut observe: impl FnMut(u64, &SpectralState),
    ) -> Result<SpectralState> {
        let mut u = u0.clone();
        observe(first_segment, &u);
        for seg in first_segment..first_segment + units {
            let f = self.force(trajectory, seg);
            u = self.solver.shift(&u, &f).map_err(|e| offset_time(e, seg as f64))?;
            observe(seg + 1, &u);
        }
        Ok(u)
    }

    /// Run `units` unit segments of forcing drawn from the burn-in streams.
    pub fn burn_in(&self, u0: &SpectralState, trajectory: u64, units: u64) -> Result<SpectralState> {
        let mut u = u0.clone();
        for seg in 0..units {
            let f = self
                .forcing
                .sample_stream(self.seed, StreamDomain::BurnIn, trajectory, seg);
            u = self.solver.shift(&u, &f).map_err(|e| offset_time(e, seg as f64))?;
        }
        Ok(u)
    }

    /// A random unit vector supported on the resolved modes.
    pub fn random_direction(&self, trajectory: u64) -> Result<SpectralState> {
        let mut rng = stream(self.seed, StreamDomain::Initial, trajectory, 0);
        let n = self.n_modes();
        let modes: Vec<(i64, Complex64)> = SpectralState::resolved_wavenumbers(self.linearization.n_resolved)
            .into_iter()
            .map(|k| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                (k, Complex64::new(re, im))
            })
            .collect();
        let s = SpectralState::from_modes(n, &modes)?;
        let norm = s.norm();
        Ok(s.scaled(1.0 / norm))
    }
}

fn offset_time(err: Error, offset: f64) -> Error {
    match err {
        Error::BlowUp { time, detail } => Error::BlowUp {
            time: time + offset,
            detail,
        },
        other => other,
    }
}
