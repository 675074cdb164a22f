use crate::error::{Error, Result};

/// Parameters of `u̇ − εΔu − iγΔu + i|u|^{2p}u = η⃗` on the 1-D torus.
#[derive(Debug, Clone, PartialEq)]
pub struct CglParams {
    /// Dissipation `ε > 0`.
    pub epsilon: f64,
    /// Dispersion `γ >= 0`.
    pub gamma: f64,
    /// Nonlinearity degree `p >= 1`.
    pub p: u32,
    /// Mass shift `m₀` in `λ_k = ε(k² + m₀)`.
    pub mass_shift: f64,
    pub n_modes: usize,
    /// The time step is `2^-dt_log2`.
    pub dt_log2: u32,
    /// When false the operator `B` (dispersion and `i|u|^{2p}u`) is switched off,
    /// leaving the linear heat flow. Used by closed-form checks.
    pub nonlinear: bool,
}

impl Default for CglParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            gamma: 0.5,
            p: 1,
            mass_shift: 1.0,
            n_modes: 64,
            dt_log2: 7,
            nonlinear: true,
        }
    }
}

impl CglParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::config(format!("epsilon = {} must be positive", self.epsilon)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::config(format!("gamma = {} must be nonnegative", self.gamma)));
        }
        if self.p == 0 {
            return Err(Error::config("nonlinearity degree p must be at least 1"));
        }
        if !(self.mass_shift >= 0.0) || !self.mass_shift.is_finite() {
            return Err(Error::config(format!("mass shift = {} must be nonnegative", self.mass_shift)));
        }
        if self.n_modes < 2 || !self.n_modes.is_multiple_of(2) {
            return Err(Error::config(format!("n_modes = {} must be even and at least 2", self.n_modes)));
        }
        if self.dt_log2 > 20 {
            return Err(Error::config(format!("dt_log2 = {} is unreasonably fine", self.dt_log2)));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        (-(self.dt_log2 as f64)).exp2()
    }

    pub fn steps_per_unit(&self) -> usize {
        1usize << self.dt_log2
    }

    /// Eigenvalue `λ_k = ε(k² + m₀)` of the dissipation.
    pub fn lambda(&self, k: i64) -> f64 {
        self.epsilon * ((k * k) as f64 + self.mass_shift)
    }
}
