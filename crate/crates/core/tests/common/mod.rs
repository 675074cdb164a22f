#![allow(dead_code)]

use num_complex::Complex64;
use redmix::config::RunConfig;
use redmix::coupling::CouplingPolicy;
use redmix::dynamics::{CglParams, LinearizationConfig, SpectralState};
use redmix::noise::{ForcingSpec, NoiseDensity, RedNoiseSpec};
use redmix::Lab;

pub fn noise(levels: u32) -> RedNoiseSpec {
    RedNoiseSpec::power_law(1.0, 2.0, levels, NoiseDensity::Uniform).unwrap()
}

/// The model with every default setting.
pub fn default_lab() -> Lab {
    RunConfig::default().lab().unwrap()
}

/// Heat flow without `B`, every resolved mode forced, exact ridge.
pub fn linear_lab() -> Lab {
    let params = CglParams {
        nonlinear: false,
        ..CglParams::default()
    };
    let lin = LinearizationConfig::default();
    let modes = SpectralState::resolved_wavenumbers(lin.n_resolved);
    let forcing = ForcingSpec::new(modes.clone(), vec![0.3; modes.len()], noise(6)).unwrap();
    let policy = CouplingPolicy {
        lambda_reg: 0.0,
        ..CouplingPolicy::default()
    };
    Lab::new(params, forcing, 11, lin, policy).unwrap()
}

pub fn state(n: usize, modes: &[(i64, f64, f64)]) -> SpectralState {
    let m: Vec<(i64, Complex64)> = modes.iter().map(|&(k, re, im)| (k, Complex64::new(re, im))).collect();
    SpectralState::from_modes(n, &m).unwrap()
}

pub fn rel_err(a: &SpectralState, b: &SpectralState) -> f64 {
    a.sub(b).unwrap().norm() / b.norm()
}
