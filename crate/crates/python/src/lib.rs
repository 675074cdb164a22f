//! Python module `redmix_py`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use redmix::config::RunConfig;
use redmix::coupling::{couple_step, run_coupling, CouplingPolicy};
use redmix::diagnostics::{self, ObservableSet};
use redmix::dynamics::{dist_h, SpectralState};
use redmix::{Error, Lab};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Argument(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Spectral coefficients `u_k` on the periodic grid.
#[pyclass(name = "State", module = "redmix_py", from_py_object)]
#[derive(Clone)]
pub struct PyState {
    inner: SpectralState,
}

#[pymethods]
impl PyState {
    /// State with `n_modes` coefficients, set from `{k: complex}`.
    #[new]
    #[pyo3(signature = (n_modes, modes = None))]
    fn new(n_modes: usize, modes: Option<Vec<(i64, Complex64)>>) -> PyResult<Self> {
        let inner = SpectralState::from_modes(n_modes, &modes.unwrap_or_default()).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.inner.n_modes()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn sobolev_norm(&self) -> f64 {
        self.inner.sobolev_norm()
    }

    fn get(&self, k: i64) -> Option<Complex64> {
        self.inner.get(k)
    }

    /// Coefficients in FFT order.
    fn coefficients(&self) -> Vec<Complex64> {
        self.inner.coeffs().to_vec()
    }

    fn distance(&self, other: &PyState) -> PyResult<f64> {
        dist_h(&self.inner, &other.inner).map_err(py_err)
    }

    /// `self + alpha * other`.
    fn plus(&self, alpha: f64, other: &PyState) -> PyResult<PyState> {
        let mut inner = self.inner.clone();
        inner.axpy(alpha, &other.inner).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!("State(n_modes={}, norm={:.6e})", self.inner.n_modes(), self.inner.norm())
    }
}

/// Model, forcing law and coupling policy built from a configuration.
#[pyclass(name = "Lab", module = "redmix_py")]
pub struct PyLab {
    lab: Lab,
    config: RunConfig,
}

#[pymethods]
impl PyLab {
    /// Build from an optional TOML file and `section.key=value` overrides.
    #[new]
    #[pyo3(signature = (config = None, overrides = Vec::new()))]
    fn new(config: Option<std::path::PathBuf>, overrides: Vec<String>) -> PyResult<Self> {
        let config = RunConfig::load(config.as_deref(), &overrides, None).map_err(py_err)?;
        config.validate().map_err(py_err)?;
        let lab = config.lab().map_err(py_err)?;
        Ok(Self { lab, config })
    }

    /// The resolved configuration as TOML.
    fn resolved_config(&self) -> String {
        self.config.to_toml()
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.lab.n_modes()
    }

    fn zeros(&self) -> PyResult<PyState> {
        Ok(PyState { inner: SpectralState::zeros(self.lab.n_modes()).map_err(py_err)? })
    }

    fn random_direction(&self, trajectory: u64) -> PyResult<PyState> {
        Ok(PyState { inner: self.lab.random_direction(trajectory).map_err(py_err)? })
    }

    fn burn_in(&self, u0: &PyState, trajectory: u64, units: u64) -> PyResult<PyState> {
        Ok(PyState { inner: self.lab.burn_in(&u0.inner, trajectory, units).map_err(py_err)? })
    }

    /// One application of the shift map with the noise of `(trajectory, segment)`.
    fn shift(&self, u0: &PyState, trajectory: u64, segment: u64) -> PyResult<PyState> {
        let f = self.lab.force(trajectory, segment);
        Ok(PyState { inner: self.lab.solver().shift(&u0.inner, &f).map_err(py_err)? })
    }

    /// Integrate `units` segments; returns the states at every integer time.
    fn simulate(&self, u0: &PyState, trajectory: u64, units: u64) -> PyResult<Vec<PyState>> {
        let mut out = Vec::with_capacity(units as usize + 1);
        self.lab
            .simulate(&u0.inner, trajectory, 0, units, |_, u| out.push(PyState { inner: u.clone() }))
            .map_err(py_err)?;
        Ok(out)
    }

    /// Response of the shift to the independent noise copy of `(trajectory, segment)`.
    fn tangent(&self, u0: &PyState, trajectory: u64, segment: u64) -> PyResult<PyState> {
        let solver = self.lab.solver();
        let f = self.lab.force(trajectory, segment);
        let traj = solver.shift_with_trajectory(&u0.inner, &f).map_err(py_err)?;
        let src = self.lab.independent_force(trajectory, segment);
        Ok(PyState { inner: solver.tangent(&traj, &src).map_err(py_err)? })
    }

    /// Truncated noise derivative as a row-major list of rows.
    fn linearized(&self, u0: &PyState, trajectory: u64, segment: u64) -> PyResult<Vec<Vec<f64>>> {
        let f = self.lab.force(trajectory, segment);
        let d = self
            .lab
            .solver()
            .build_linearized_at(&u0.inner, &f, self.lab.linearization())
            .map_err(py_err)?;
        let m = d.matrix();
        Ok((0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect())
    }

    /// One coupling step; returns `(u1, v1, record)`.
    fn couple_step<'py>(
        &self,
        py: Python<'py>,
        u: &PyState,
        v: &PyState,
        run: u64,
        k: u64,
    ) -> PyResult<(PyState, PyState, Bound<'py, PyAny>)> {
        let eta = self.lab.force(run, k);
        let indep = self.lab.independent_force(run, k);
        let out = couple_step(&self.lab, k as usize, &u.inner, &v.inner, &eta, &indep).map_err(py_err)?;
        let record = to_py(py, &out.record)?;
        Ok((PyState { inner: out.u_next }, PyState { inner: out.v_next }, record))
    }

    /// Coupling run; returns the list of step records.
    fn couple<'py>(&self, py: Python<'py>, u0: &PyState, v0: &PyState, run: u64, horizon: usize) -> PyResult<Bound<'py, PyAny>> {
        let r = run_coupling(&self.lab, &u0.inner, &v0.inner, run, horizon).map_err(py_err)?;
        to_py(py, &r.records)
    }

    #[pyo3(signature = (u01, u02, ensemble, horizon, observables = None, offset = 1_000_000))]
    #[allow(clippy::too_many_arguments)]
    fn mixing<'py>(
        &self,
        py: Python<'py>,
        u01: &PyState,
        u02: &PyState,
        ensemble: usize,
        horizon: u64,
        observables: Option<Vec<String>>,
        offset: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let obs = match observables {
            Some(names) => ObservableSet::parse(&names).map_err(py_err)?,
            None => ObservableSet::default(),
        };
        let r = diagnostics::mixing_distance(&self.lab, &u01.inner, &u02.inner, ensemble, horizon, &obs, offset)
            .map_err(py_err)?;
        to_py(py, &r)
    }

    fn contraction_scan<'py>(&self, py: Python<'py>, samples: usize, burn_in: u64, delta: f64) -> PyResult<Bound<'py, PyAny>> {
        let bases = diagnostics::base_points(&self.lab, samples, burn_in).map_err(py_err)?;
        to_py(py, &diagnostics::contraction_scan(&self.lab, &bases, delta).map_err(py_err)?)
    }

    fn marginal_law<'py>(&self, py: Python<'py>, samples: usize, burn_in: u64, deltas: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
        let bases = diagnostics::base_points(&self.lab, samples, burn_in).map_err(py_err)?;
        let r = diagnostics::marginal_law_distance(&self.lab, &bases, &deltas, Default::default()).map_err(py_err)?;
        to_py(py, &r)
    }

    fn rank_scan<'py>(&self, py: Python<'py>, samples: usize, burn_in: u64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &diagnostics::h3_rank_scan(&self.lab, samples, burn_in).map_err(py_err)?)
    }

    fn zero_stability<'py>(&self, py: Python<'py>, initial: Vec<PyState>, fit_start: u64, horizon: u64) -> PyResult<Bound<'py, PyAny>> {
        let init: Vec<SpectralState> = initial.into_iter().map(|s| s.inner).collect();
        let r = diagnostics::verify_zero_stability(&self.lab, &init, fit_start, horizon).map_err(py_err)?;
        to_py(py, &r)
    }

    /// Copy of this lab with the coupling policy fields in `policy` replaced.
    #[pyo3(signature = (delta0 = None, rho_max = None, lambda_reg = None, xi_max = None))]
    fn with_policy(&self, delta0: Option<f64>, rho_max: Option<f64>, lambda_reg: Option<f64>, xi_max: Option<f64>) -> PyResult<Self> {
        let old = self.lab.policy();
        let policy = CouplingPolicy {
            delta0: delta0.unwrap_or(old.delta0),
            rho_max: rho_max.unwrap_or(old.rho_max),
            lambda_reg: lambda_reg.unwrap_or(old.lambda_reg),
            xi_max: xi_max.unwrap_or(old.xi_max),
            ..old.clone()
        };
        let mut config = self.config.clone();
        config.coupling = policy.clone();
        Ok(Self { lab: self.lab.with_policy(policy).map_err(py_err)?, config })
    }
}

/// Haar orthonormality, path boundedness and the Donsker check for the noise law of `lab`.
#[pyfunction]
#[pyo3(signature = (lab, paths = 10_000, donsker_n = 4096, donsker_samples = 5000))]
fn noise_check<'py>(py: Python<'py>, lab: &PyLab, paths: usize, donsker_n: usize, donsker_samples: usize) -> PyResult<Bound<'py, PyAny>> {
    let spec = lab.config.noise_spec().map_err(py_err)?;
    let r = diagnostics::noise_check(&spec, lab.config.seed, paths, donsker_n, donsker_samples).map_err(py_err)?;
    to_py(py, &r)
}

/// Run the command-line tool in-process; returns its exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    redmix::cli::main_with_args(std::iter::once("redmix".to_string()).chain(args))
}

#[pymodule]
fn redmix_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_class::<PyLab>()?;
    m.add_function(wrap_pyfunction!(noise_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
