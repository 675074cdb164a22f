//! Run configuration: a TOML file, `REDMIX_OUT`, then `key=value` overrides.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::CouplingPolicy;
use crate::diagnostics::ObservableSet;
use crate::dynamics::{CglParams, LinearizationConfig, SpectralState};
use crate::error::{Error, Result};
use crate::lab::Lab;
use crate::noise::{ForcingSpec, NoiseDensity, RedNoiseSpec};

/// Environment variable replacing `out_dir`.
pub const OUT_ENV: &str = "REDMIX_OUT";

/// `(k, re, im)` triples describing a state by its nonzero modes.
pub type ModeList = Vec<(i64, f64, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<String>,
    pub seed: u64,
    pub out_dir: String,
    pub noise: NoiseSection,
    pub force: ForceSection,
    pub cgl: CglSection,
    pub grid: GridSection,
    pub linop: LinopSection,
    pub coupling: CouplingPolicy,
    pub diag: DiagSection,
    pub init: InitSection,
    pub simulate: SimulateSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    #[serde(rename = "K")]
    pub k: u32,
    pub q: f64,
    pub c0: f64,
    pub density: NoiseDensity,
    /// Paths sampled by the boundedness check.
    pub check_paths: usize,
    pub donsker_n: usize,
    pub donsker_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForceSection {
    pub modes: Vec<i64>,
    /// One amplitude per mode, or a single value used for every mode.
    pub amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CglSection {
    pub epsilon: f64,
    pub gamma: f64,
    pub p: u32,
    pub mass_shift: f64,
    pub nonlinear: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n_modes: usize,
    pub dt_log2: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinopSection {
    pub k_ctl: u32,
    pub n_resolved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagSection {
    /// Trajectories per ensemble in `mixing`.
    pub ensemble: usize,
    /// Horizon of `mixing` in unit steps.
    pub horizon: u64,
    pub observables: Vec<String>,
    pub delta_grid: Vec<f64>,
    /// Trajectory offset of the second `mixing` ensemble; 0 shares the noise.
    pub mixing_offset: u64,
    pub u01: ModeList,
    pub u02: ModeList,
    /// Base points per separation in the coupling scans.
    pub samples: usize,
    /// Units of forcing used to reach the absorbing set.
    pub burn_in: u64,
    /// Also run the contraction and marginal-law scans in `couple`.
    pub coupling_scan: bool,
    pub absorbing_initial: usize,
    pub absorbing_max_norm: f64,
    pub absorbing_noises: usize,
    pub absorbing_horizon: u64,
    /// Time step of the absorbing check; large data need a finer step than the default.
    pub absorbing_dt_log2: u32,
    pub zero_initial: usize,
    pub zero_norm: f64,
    pub zero_fit_start: u64,
    pub zero_horizon: u64,
    pub rank_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitSection {
    pub u0: ModeList,
    /// `v0 = u0 + v0_offset` for `couple`.
    pub v0_offset: ModeList,
    /// Units of burn-in forcing applied to `u0` (and the same to `v0`) first.
    pub burn_in: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub horizon: u64,
    pub trajectories: u64,
    pub dump_modes: Vec<i64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            seed: 7,
            out_dir: "redmix-out".into(),
            noise: NoiseSection::default(),
            force: ForceSection::default(),
            cgl: CglSection::default(),
            grid: GridSection::default(),
            linop: LinopSection::default(),
            coupling: CouplingPolicy::default(),
            diag: DiagSection::default(),
            init: InitSection::default(),
            simulate: SimulateSection::default(),
        }
    }
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            k: 6,
            q: 2.0,
            c0: 1.0,
            density: NoiseDensity::Uniform,
            check_paths: 10_000,
            donsker_n: 4096,
            donsker_samples: 5000,
        }
    }
}

impl Default for ForceSection {
    fn default() -> Self {
        Self {
            modes: vec![-2, -1, 0, 1, 2, 3],
            amplitudes: vec![0.3],
        }
    }
}

impl Default for CglSection {
    fn default() -> Self {
        let p = CglParams::default();
        Self {
            epsilon: p.epsilon,
            gamma: p.gamma,
            p: p.p,
            mass_shift: p.mass_shift,
            nonlinear: p.nonlinear,
        }
    }
}

impl Default for GridSection {
    fn default() -> Self {
        let p = CglParams::default();
        Self {
            n_modes: p.n_modes,
            dt_log2: p.dt_log2,
        }
    }
}

impl Default for LinopSection {
    fn default() -> Self {
        let l = LinearizationConfig::default();
        Self {
            k_ctl: l.k_ctl,
            n_resolved: l.n_resolved,
        }
    }
}

impl Default for DiagSection {
    fn default() -> Self {
        Self {
            ensemble: 200,
            horizon: 50,
            observables: ObservableSet::default().names(),
            delta_grid: vec![1e-2, 1e-3, 1e-4],
            mixing_offset: 1_000_000,
            u01: vec![(0, 0.7, 0.0)],
            u02: vec![(0, -0.7, 0.0)],
            samples: 200,
            burn_in: 30,
            coupling_scan: false,
            absorbing_initial: 10,
            absorbing_max_norm: 10.0,
            absorbing_noises: 10,
            absorbing_horizon: 100,
            absorbing_dt_log2: 9,
            zero_initial: 10,
            zero_norm: 1e-3,
            zero_fit_start: 20,
            zero_horizon: 40,
            rank_samples: 20,
        }
    }
}

impl Default for InitSection {
    fn default() -> Self {
        Self {
            u0: Vec::new(),
            v0_offset: vec![(0, 9e-3, 0.0)],
            burn_in: 30,
        }
    }
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            horizon: 100,
            trajectories: 1,
            dump_modes: vec![0, 1],
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key just written"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Set `a.b.c = value` inside `table`, creating intermediate tables.
fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(format!("malformed key '{key}'")));
    }
    let (last, path) = parts.split_last().expect("split yields one part");
    let mut cur = table;
    for p in path {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(format!("'{p}' in '{key}' is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Layer the file (if any), `REDMIX_OUT` and the `key=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String], env_out: Option<String>) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::config(format!("cannot read config {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        if let Some(out) = env_out {
            table.insert("out_dir".into(), toml::Value::String(out));
        }
        for ov in overrides {
            let (key, raw) = ov
                .split_once('=')
                .ok_or_else(|| Error::config(format!("override '{ov}' is not key=value")))?;
            set_dotted(&mut table, key, parse_value(raw.trim()))?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn params(&self) -> CglParams {
        CglParams {
            epsilon: self.cgl.epsilon,
            gamma: self.cgl.gamma,
            p: self.cgl.p,
            mass_shift: self.cgl.mass_shift,
            n_modes: self.grid.n_modes,
            dt_log2: self.grid.dt_log2,
            nonlinear: self.cgl.nonlinear,
        }
    }

    pub fn noise_spec(&self) -> Result<RedNoiseSpec> {
        RedNoiseSpec::power_law(self.noise.c0, self.noise.q, self.noise.k, self.noise.density)
            .map_err(|e| Error::config(e.to_string()))
    }

    pub fn forcing(&self) -> Result<ForcingSpec> {
        let amplitudes = match self.force.amplitudes.as_slice() {
            [a] => vec![*a; self.force.modes.len()],
            other => other.to_vec(),
        };
        ForcingSpec::new(self.force.modes.clone(), amplitudes, self.noise_spec()?)
            .map_err(|e| Error::config(e.to_string()))
    }

    pub fn linearization(&self) -> LinearizationConfig {
        LinearizationConfig {
            k_ctl: self.linop.k_ctl,
            n_resolved: self.linop.n_resolved,
        }
    }

    pub fn lab(&self) -> Result<Lab> {
        Lab::new(self.params(), self.forcing()?, self.seed, self.linearization(), self.coupling.clone())
            .map_err(|e| match e {
                Error::Argument(m) => Error::Config(m),
                other => other,
            })
    }

    pub fn observables(&self) -> Result<ObservableSet> {
        ObservableSet::parse(&self.diag.observables)
    }

    /// State with the listed modes on the configured grid.
    pub fn state(&self, modes: &ModeList) -> Result<SpectralState> {
        let m: Vec<(i64, Complex64)> = modes.iter().map(|&(k, re, im)| (k, Complex64::new(re, im))).collect();
        SpectralState::from_modes(self.grid.n_modes, &m).map_err(|e| Error::config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = &self.command {
            if !crate::cli::COMMANDS.contains(&c.as_str()) {
                return Err(Error::config(format!("unknown command '{c}'")));
            }
        }
        self.lab()?;
        let obs = self.observables()?;
        obs.check(self.grid.n_modes)?;
        for modes in [&self.init.u0, &self.init.v0_offset, &self.diag.u01, &self.diag.u02] {
            self.state(modes)?;
        }
        for &k in &self.simulate.dump_modes {
            if SpectralState::index_of(self.grid.n_modes, k).is_none() {
                return Err(Error::config(format!("simulate.dump_modes: mode {k} outside the grid")));
            }
        }
        if self.diag.delta_grid.iter().any(|d| !(*d > 0.0)) || self.diag.delta_grid.is_empty() {
            return Err(Error::config("diag.delta_grid must hold positive separations"));
        }
        let positive = [
            ("diag.ensemble", self.diag.ensemble),
            ("diag.samples", self.diag.samples),
            ("diag.absorbing_initial", self.diag.absorbing_initial),
            ("diag.absorbing_noises", self.diag.absorbing_noises),
            ("diag.zero_initial", self.diag.zero_initial),
            ("diag.rank_samples", self.diag.rank_samples),
            ("noise.check_paths", self.noise.check_paths),
            ("noise.donsker_n", self.noise.donsker_n),
            ("noise.donsker_samples", self.noise.donsker_samples),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        if self.simulate.horizon == 0 || self.simulate.trajectories == 0 {
            return Err(Error::config("simulate.horizon and simulate.trajectories must be positive"));
        }
        if !(self.diag.absorbing_max_norm > 0.0) || !(self.diag.zero_norm > 0.0) {
            return Err(Error::config("diag.absorbing_max_norm and diag.zero_norm must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let back: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn overrides_apply_and_unknown_keys_fail() {
        let cfg = RunConfig::load(None, &["cgl.epsilon=0.2".into(), "noise.K=5".into()], None).unwrap();
        assert_eq!(cfg.cgl.epsilon, 0.2);
        assert_eq!(cfg.noise.k, 5);
        assert!(matches!(
            RunConfig::load(None, &["cgl.bogus=1".into()], None),
            Err(Error::Config(_))
        ));
        assert!(matches!(RunConfig::load(None, &["noK".into()], None), Err(Error::Config(_))));
    }

    #[test]
    fn env_sets_out_dir() {
        let cfg = RunConfig::load(None, &[], Some("/tmp/x".into())).unwrap();
        assert_eq!(cfg.out_dir, "/tmp/x");
    }
}
