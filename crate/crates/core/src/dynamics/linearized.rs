use nalgebra::{DMatrix, DVector};

use super::state::SpectralState;
use crate::error::{Error, Result};
use crate::noise::ForceProfile;

/// Truncation of both sides of `D_η S`: Haar levels `<= k_ctl` on the noise
/// side, the `n_resolved` lowest Fourier modes on the state side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearizationConfig {
    pub k_ctl: u32,
    pub n_resolved: usize,
}

impl Default for LinearizationConfig {
    fn default() -> Self {
        Self { k_ctl: 1, n_resolved: 16 }
    }
}

impl LinearizationConfig {
    pub fn validate(&self, n_modes: usize, force: &ForceProfile) -> Result<()> {
        if self.n_resolved < 2 || !self.n_resolved.is_multiple_of(2) || self.n_resolved > n_modes {
            return Err(Error::config(format!(
                "linop.n_resolved = {} must be even, at least 2 and at most {n_modes}",
                self.n_resolved
            )));
        }
        if !force.modes().is_empty() && self.k_ctl > force.levels() {
            return Err(Error::argument(format!(
                "linop.k_ctl = {} exceeds the noise level {}",
                self.k_ctl,
                force.levels()
            )));
        }
        Ok(())
    }
}

/// Dense matrix of `D_η S(u₀, η⃗)` restricted to the truncated spaces.
///
/// Column `i` is the tangent response to the `i`-th embedded noise coordinate;
/// rows are the real parts, then imaginary parts, of the resolved modes.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    matrix: DMatrix<f64>,
    base_state: SpectralState,
    base_force: ForceProfile,
    config: LinearizationConfig,
}

impl LinearizedOperator {
    pub(crate) fn from_columns(
        columns: Vec<Vec<f64>>,
        rows: usize,
        base_state: SpectralState,
        base_force: ForceProfile,
        config: LinearizationConfig,
    ) -> Result<Self> {
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Numerical("tangent column of wrong length".into()));
        }
        let flat: Vec<f64> = columns.into_iter().flatten().collect();
        let cols = flat.len() / rows.max(1);
        Ok(Self {
            matrix: DMatrix::from_column_slice(rows, cols, &flat),
            base_state,
            base_force,
            config,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn base_state(&self) -> &SpectralState {
        &self.base_state
    }

    pub fn base_force(&self) -> &ForceProfile {
        &self.base_force
    }

    pub fn config(&self) -> LinearizationConfig {
        self.config
    }

    /// Matrix-vector product with an embedded noise perturbation.
    pub fn apply(&self, coords: &[f64]) -> Result<Vec<f64>> {
        if coords.len() != self.cols() {
            return Err(Error::argument(format!(
                "expected {} coefficients, got {}",
                self.cols(),
                coords.len()
            )));
        }
        Ok((&self.matrix * DVector::from_column_slice(coords)).as_slice().to_vec())
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.matrix.clone().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}
