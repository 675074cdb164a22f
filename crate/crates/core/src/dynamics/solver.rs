//! Fourth-order exponential time differencing for the forced CGL equation and
//! the exact tangent of the discrete map.
//!
//! The linear part `−λ_k − iγk²` is integrated exactly; the remaining term
//! `N(u) = −i P_N(|u|^{2p}u) + η⃗` goes through the Cox–Matthews stages. The
//! force is piecewise constant on dyadic cells at least one step wide, so the
//! noise enters each step exactly.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::linearized::{LinearizationConfig, LinearizedOperator};
use super::params::CglParams;
use super::phi::EtdCoefficients;
use super::state::SpectralState;
use crate::error::{Error, Result};
use crate::noise::ForceProfile;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Pointwise factors of the linearized nonlinearity at one stage:
/// `d(|u|^{2p}u)·v = g1·v + g2·conj(v)` on the padded grid.
#[derive(Debug, Clone)]
struct StageFactors {
    g1: Vec<f64>,
    g2: Vec<C>,
}

#[derive(Debug, Clone)]
struct StepRecord {
    stages: [StageFactors; 4],
}

/// Solution of one unit-time shift, kept for tangent solves.
#[derive(Debug, Clone)]
pub struct Trajectory {
    states: Vec<SpectralState>,
    steps: Vec<StepRecord>,
    dt_log2: u32,
}

impl Trajectory {
    /// States at `t = n·dt`, `n = 0..=steps`.
    pub fn states(&self) -> &[SpectralState] {
        &self.states
    }

    pub fn start(&self) -> &SpectralState {
        &self.states[0]
    }

    pub fn end(&self) -> &SpectralState {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn into_end(mut self) -> SpectralState {
        self.states.pop().expect("trajectory holds at least the initial state")
    }
}

/// Pseudospectral CGL solver for a fixed parameter set.
pub struct CglSolver {
    params: CglParams,
    npad: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
    etd: Vec<EtdCoefficients>,
}

impl std::fmt::Debug for CglSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CglSolver").field("params", &self.params).field("npad", &self.npad).finish()
    }
}

struct Scratch {
    grid: Vec<C>,
    fft: Vec<C>,
}

impl CglSolver {
    pub fn new(params: CglParams) -> Result<Self> {
        params.validate()?;
        let n = params.n_modes;
        // products of degree 2p+1 alias back into |k| <= n/2 only beyond (p+1)n points
        let npad = (params.p as usize + 1) * n;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(npad);
        let inverse = planner.plan_fft_inverse(npad);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let h = params.dt();
        let etd = (0..n)
            .map(|i| {
                let k = SpectralState::wavenumber(n, i);
                EtdCoefficients::new(-linear_symbol(&params, k), h)
            })
            .collect();
        Ok(Self {
            params,
            npad,
            forward,
            inverse,
            scratch_len,
            etd,
        })
    }

    pub fn params(&self) -> &CglParams {
        &self.params
    }

    pub fn n_modes(&self) -> usize {
        self.params.n_modes
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            grid: vec![ZERO; self.npad],
            fft: vec![ZERO; self.scratch_len],
        }
    }

    fn pad_index(&self, i: usize) -> usize {
        let n = self.params.n_modes;
        let k = SpectralState::wavenumber(n, i);
        if k >= 0 {
            k as usize
        } else {
            (self.npad as i64 + k) as usize
        }
    }

    fn check_state(&self, u: &SpectralState) -> Result<()> {
        if u.n_modes() != self.params.n_modes {
            return Err(Error::argument(format!(
                "state has {} modes, solver expects {}",
                u.n_modes(),
                self.params.n_modes
            )));
        }
        Ok(())
    }

    /// `L u`: coefficient `k` multiplied by `λ_k = ε(k² + m₀)`.
    pub fn apply_l(&self, u: &SpectralState) -> Result<SpectralState> {
        self.check_state(u)?;
        let n = u.n_modes();
        let coeffs = u
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| c * self.params.lambda(SpectralState::wavenumber(n, i)))
            .collect();
        SpectralState::from_coeffs(coeffs)
    }

    /// `B(u) = −iγΔu + i|u|^{2p}u` in coefficients (zero when `B` is switched off).
    pub fn nonlinearity(&self, u: &SpectralState) -> Result<SpectralState> {
        self.check_state(u)?;
        let mut out = SpectralState::zeros(u.n_modes())?;
        if !self.params.nonlinear {
            return Ok(out);
        }
        let mut ws = self.scratch();
        let mut react = vec![ZERO; u.n_modes()];
        self.reaction(u.coeffs(), &mut ws, &mut react, None);
        let n = u.n_modes();
        if react.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numerical("non-finite values in the nonlinearity".into()));
        }
        for (i, (o, (c, r))) in out.coeffs_mut().iter_mut().zip(u.coeffs().iter().zip(&react)).enumerate() {
            let k = SpectralState::wavenumber(n, i) as f64;
            // react = -i P(|u|^{2p}u), and B carries the opposite sign
            *o = C::new(0.0, self.params.gamma * k * k) * c - r;
        }
        Ok(out)
    }

    /// `out = −i P_N(|u|^{2p}u)`; optionally records the stage factors.
    fn reaction(&self, u: &[C], ws: &mut Scratch, out: &mut [C], record: Option<&mut StageFactors>) {
        if !self.params.nonlinear {
            out.iter_mut().for_each(|o| *o = ZERO);
            if let Some(rec) = record {
                rec.g1.clear();
                rec.g2.clear();
            }
            return;
        }
        ws.grid.iter_mut().for_each(|g| *g = ZERO);
        for (i, c) in u.iter().enumerate() {
            ws.grid[self.pad_index(i)] = *c;
        }
        self.inverse.process_with_scratch(&mut ws.grid, &mut ws.fft);
        let p = self.params.p as i32;
        if let Some(rec) = record {
            rec.g1.resize(self.npad, 0.0);
            rec.g2.resize(self.npad, ZERO);
            for (j, v) in ws.grid.iter().enumerate() {
                let m = v.norm_sqr();
                let mp1 = if p == 1 { 1.0 } else { m.powi(p - 1) };
                rec.g1[j] = (p + 1) as f64 * mp1 * m;
                rec.g2[j] = v * v * (p as f64 * mp1);
            }
        }
        for v in ws.grid.iter_mut() {
            let m = v.norm_sqr();
            *v *= if p == 1 { m } else { m.powi(p) };
        }
        self.forward.process_with_scratch(&mut ws.grid, &mut ws.fft);
        let scale = 1.0 / self.npad as f64;
        for (i, o) in out.iter_mut().enumerate() {
            let w = ws.grid[self.pad_index(i)] * scale;
            *o = C::new(w.im, -w.re);
        }
    }

    /// `out = −i P_N(g1·v + g2·conj(v))`.
    fn reaction_tangent(&self, factors: &StageFactors, v: &[C], ws: &mut Scratch, out: &mut [C]) {
        if !self.params.nonlinear {
            out.iter_mut().for_each(|o| *o = ZERO);
            return;
        }
        ws.grid.iter_mut().for_each(|g| *g = ZERO);
        for (i, c) in v.iter().enumerate() {
            ws.grid[self.pad_index(i)] = *c;
        }
        self.inverse.process_with_scratch(&mut ws.grid, &mut ws.fft);
        for ((g, g1), g2) in ws.grid.iter_mut().zip(&factors.g1).zip(&factors.g2) {
            *g = *g * *g1 + g2 * g.conj();
        }
        self.forward.process_with_scratch(&mut ws.grid, &mut ws.fft);
        let scale = 1.0 / self.npad as f64;
        for (i, o) in out.iter_mut().enumerate() {
            let w = ws.grid[self.pad_index(i)] * scale;
            *o = C::new(w.im, -w.re);
        }
    }

    /// Dense forcing per step for a profile on one unit segment.
    fn step_forcing(&self, force: &ForceProfile) -> Result<Vec<Vec<C>>> {
        // a level-K path is constant on cells of width 2^-(K+1)
        let cell_log2 = force.levels() + 1;
        if !force.modes().is_empty() && cell_log2 > self.params.dt_log2 {
            return Err(Error::config(format!(
                "time step 2^-{} does not resolve forcing cells of width 2^-{cell_log2}",
                self.params.dt_log2
            )));
        }
        let n = self.params.n_modes;
        let cells = force.cell_forcing(n)?;
        let per_cell = self.params.steps_per_unit() / cells.len();
        let mut out = Vec::with_capacity(self.params.steps_per_unit());
        for cell in &cells {
            let mut dense = vec![ZERO; n];
            for &(i, c) in cell {
                dense[i] += c;
            }
            for _ in 0..per_cell {
                out.push(dense.clone());
            }
        }
        Ok(out)
    }

    fn etd_step(&self, u: &[C], f: &[C], ws: &mut Scratch, record: Option<&mut StepRecord>) -> Vec<C> {
        let n = u.len();
        let mut nu = vec![ZERO; n];
        let mut na = vec![ZERO; n];
        let mut nb = vec![ZERO; n];
        let mut nc = vec![ZERO; n];
        let (r0, r1, r2, r3) = match record {
            Some(rec) => {
                let [a, b, c, d] = &mut rec.stages;
                (Some(a), Some(b), Some(c), Some(d))
            }
            None => (None, None, None, None),
        };
        self.reaction(u, ws, &mut nu, r0);
        add_assign(&mut nu, f);
        let a: Vec<C> = (0..n).map(|i| self.etd[i].e_half * u[i] + self.etd[i].q * nu[i]).collect();
        self.reaction(&a, ws, &mut na, r1);
        add_assign(&mut na, f);
        let b: Vec<C> = (0..n).map(|i| self.etd[i].e_half * u[i] + self.etd[i].q * na[i]).collect();
        self.reaction(&b, ws, &mut nb, r2);
        add_assign(&mut nb, f);
        let c: Vec<C> = (0..n)
            .map(|i| self.etd[i].e_half * a[i] + self.etd[i].q * (nb[i] * 2.0 - nu[i]))
            .collect();
        self.reaction(&c, ws, &mut nc, r3);
        add_assign(&mut nc, f);
        (0..n)
            .map(|i| {
                let k = &self.etd[i];
                k.e_full * u[i] + k.f1 * nu[i] + k.f2 * (na[i] + nb[i]) * 2.0 + k.f3 * nc[i]
            })
            .collect()
    }

    fn tangent_etd_step(&self, rec: &StepRecord, v: &[C], s: &[C], ws: &mut Scratch) -> Vec<C> {
        let n = v.len();
        let mut dnu = vec![ZERO; n];
        let mut dna = vec![ZERO; n];
        let mut dnb = vec![ZERO; n];
        let mut dnc = vec![ZERO; n];
        self.reaction_tangent(&rec.stages[0], v, ws, &mut dnu);
        add_assign(&mut dnu, s);
        let da: Vec<C> = (0..n).map(|i| self.etd[i].e_half * v[i] + self.etd[i].q * dnu[i]).collect();
        self.reaction_tangent(&rec.stages[1], &da, ws, &mut dna);
        add_assign(&mut dna, s);
        let db: Vec<C> = (0..n).map(|i| self.etd[i].e_half * v[i] + self.etd[i].q * dna[i]).collect();
        self.reaction_tangent(&rec.stages[2], &db, ws, &mut dnb);
        add_assign(&mut dnb, s);
        let dc: Vec<C> = (0..n)
            .map(|i| self.etd[i].e_half * da[i] + self.etd[i].q * (dnb[i] * 2.0 - dnu[i]))
            .collect();
        self.reaction_tangent(&rec.stages[3], &dc, ws, &mut dnc);
        add_assign(&mut dnc, s);
        (0..n)
            .map(|i| {
                let k = &self.etd[i];
                k.e_full * v[i] + k.f1 * dnu[i] + k.f2 * (dna[i] + dnb[i]) * 2.0 + k.f3 * dnc[i]
            })
            .collect()
    }

    fn run(
        &self,
        u0: &SpectralState,
        force: &ForceProfile,
        mut keep: Option<&mut Trajectory>,
        mut observe: impl FnMut(usize, &[C]),
    ) -> Result<SpectralState> {
        self.check_state(u0)?;
        let forcing = self.step_forcing(force)?;
        let mut ws = self.scratch();
        let mut u = u0.coeffs().to_vec();
        let dt = self.params.dt();
        observe(0, &u);
        for (step, f) in forcing.iter().enumerate() {
            let next = match keep.as_deref_mut() {
                Some(traj) => {
                    let mut rec = StepRecord {
                        stages: std::array::from_fn(|_| StageFactors {
                            g1: Vec::new(),
                            g2: Vec::new(),
                        }),
                    };
                    let next = self.etd_step(&u, f, &mut ws, Some(&mut rec));
                    traj.steps.push(rec);
                    next
                }
                None => self.etd_step(&u, f, &mut ws, None),
            };
            if next.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::BlowUp {
                    time: (step + 1) as f64 * dt,
                    detail: "non-finite coefficients".into(),
                });
            }
            u = next;
            if let Some(traj) = keep.as_deref_mut() {
                traj.states.push(SpectralState::from_coeffs(u.clone())?);
            }
            observe(step + 1, &u);
        }
        SpectralState::from_coeffs(u)
    }

    /// The shift `S(u₀, η⃗) = u(1)`.
    pub fn shift(&self, u0: &SpectralState, force: &ForceProfile) -> Result<SpectralState> {
        self.run(u0, force, None, |_, _| {})
    }

    /// `S(u₀, η⃗)` calling `observe(step, coefficients)` at every grid time, starting with step 0.
    pub fn shift_observed(
        &self,
        u0: &SpectralState,
        force: &ForceProfile,
        observe: impl FnMut(usize, &[C]),
    ) -> Result<SpectralState> {
        self.run(u0, force, None, observe)
    }

    /// `S(u₀, η⃗)` keeping everything needed by the tangent solver.
    pub fn shift_with_trajectory(&self, u0: &SpectralState, force: &ForceProfile) -> Result<Trajectory> {
        let mut traj = Trajectory {
            states: vec![u0.clone()],
            steps: Vec::with_capacity(self.params.steps_per_unit()),
            dt_log2: self.params.dt_log2,
        };
        self.run(u0, force, Some(&mut traj), |_, _| {})?;
        Ok(traj)
    }

    /// `D_η S(u₀, η⃗)ξ⃗`: solution at `t = 1` of the linearized equation with zero
    /// initial data and source `ξ⃗`.
    pub fn tangent(&self, traj: &Trajectory, source: &ForceProfile) -> Result<SpectralState> {
        self.tangent_general(traj, None, Some(source))
    }

    /// Linearized solve with optional initial perturbation (the state
    /// derivative `D_u S`) and optional source (the noise derivative).
    pub fn tangent_general(
        &self,
        traj: &Trajectory,
        initial: Option<&SpectralState>,
        source: Option<&ForceProfile>,
    ) -> Result<SpectralState> {
        let n = self.params.n_modes;
        if traj.dt_log2 != self.params.dt_log2 || traj.steps.len() != self.params.steps_per_unit() {
            return Err(Error::State("trajectory was not produced at this time step".into()));
        }
        if traj.states[0].n_modes() != n {
            return Err(Error::State("trajectory size does not match solver".into()));
        }
        let sources = match source {
            Some(src) => Some(self.step_forcing(src)?),
            None => None,
        };
        let mut v = match initial {
            Some(v0) => {
                self.check_state(v0)?;
                v0.coeffs().to_vec()
            }
            None => vec![ZERO; n],
        };
        let zero = vec![ZERO; n];
        // with zero data nothing happens before the source switches on
        let first = match (&sources, initial) {
            (Some(s), None) => s
                .iter()
                .position(|f| f.iter().any(|c| *c != ZERO))
                .unwrap_or(traj.steps.len()),
            _ => 0,
        };
        let mut ws = self.scratch();
        for step in first..traj.steps.len() {
            let s = sources.as_ref().map_or(&zero, |s| &s[step]);
            v = self.tangent_etd_step(&traj.steps[step], &v, s, &mut ws);
        }
        SpectralState::from_coeffs(v)
    }

    /// Matrix of `D_η S` from the truncated coefficient space into the resolved
    /// real components of `H`. Columns are computed in parallel and stored in
    /// index order, so the result does not depend on scheduling.
    pub fn build_linearized(
        &self,
        traj: &Trajectory,
        force: &ForceProfile,
        config: &LinearizationConfig,
    ) -> Result<LinearizedOperator> {
        config.validate(self.params.n_modes, force)?;
        let cols = force.e_dim(config.k_ctl);
        let columns: Vec<Vec<f64>> = (0..cols)
            .into_par_iter()
            .map(|i| {
                let dir = force.basis_direction(config.k_ctl, i)?;
                self.tangent(traj, &dir)?.resolved_components(config.n_resolved)
            })
            .collect::<Result<_>>()?;
        LinearizedOperator::from_columns(columns, 2 * config.n_resolved, traj.start().clone(), force.clone(), *config)
    }

    /// Convenience: run the shift and linearize about it.
    pub fn build_linearized_at(
        &self,
        u0: &SpectralState,
        force: &ForceProfile,
        config: &LinearizationConfig,
    ) -> Result<LinearizedOperator> {
        let traj = self.shift_with_trajectory(u0, force)?;
        self.build_linearized(&traj, force, config)
    }
}

fn linear_symbol(params: &CglParams, k: i64) -> C {
    let dispersion = if params.nonlinear {
        params.gamma * (k * k) as f64
    } else {
        0.0
    };
    C::new(params.lambda(k), dispersion)
}

fn add_assign(a: &mut [C], b: &[C]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}
