use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Thresholds steering the branch choice of each coupling step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingPolicy {
    /// Distances above this use an independent noise copy.
    pub delta0: f64,
    /// Largest accepted relative residual of the homological solve.
    pub rho_max: f64,
    /// Ridge parameter relative to the squared largest singular value.
    pub lambda_reg: f64,
    /// Perturbed draws must stay within `[-xi_max, xi_max]`.
    pub xi_max: f64,
    pub max_steps: usize,
    /// Distances below this count as coalesced.
    pub coalesce_tol: f64,
}

impl Default for CouplingPolicy {
    fn default() -> Self {
        Self {
            delta0: 1e-2,
            rho_max: 0.2,
            lambda_reg: 1e-8,
            xi_max: 1.0,
            max_steps: 100,
            coalesce_tol: 1e-12,
        }
    }
}

impl CouplingPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta0 > 0.0) || !self.delta0.is_finite() {
            return Err(Error::config(format!("coupling.delta0 = {} must be positive", self.delta0)));
        }
        if !(self.rho_max > 0.0 && self.rho_max < 1.0) {
            return Err(Error::config(format!("coupling.rho_max = {} must lie in (0, 1)", self.rho_max)));
        }
        if !(self.lambda_reg >= 0.0) || !self.lambda_reg.is_finite() {
            return Err(Error::config(format!("coupling.lambda_reg = {} must be nonnegative", self.lambda_reg)));
        }
        if !(self.xi_max > 0.0) {
            return Err(Error::config(format!("coupling.xi_max = {} must be positive", self.xi_max)));
        }
        if self.max_steps == 0 {
            return Err(Error::config("coupling.max_steps must be at least 1"));
        }
        if !(self.coalesce_tol >= 0.0) || self.coalesce_tol >= self.delta0 {
            return Err(Error::config(format!(
                "coupling.coalesce_tol = {} must be nonnegative and below delta0",
                self.coalesce_tol
            )));
        }
        Ok(())
    }
}
