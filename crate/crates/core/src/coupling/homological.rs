use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Regularized least-squares solution of `DΦ = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomologicalSolution {
    pub phi: Vec<f64>,
    /// `‖DΦ − rhs‖ / ‖rhs‖`, zero when `rhs = 0`.
    pub residual: f64,
    pub sigma_max: f64,
    /// Number of singular values above the pseudo-inverse cutoff.
    pub rank: usize,
}

/// Minimize `‖DΦ − rhs‖² + λ‖Φ‖²` with `λ = lambda_rel·σ_max²`.
///
/// Uses the SVD, so `lambda_rel = 0` yields the minimum-norm least-squares
/// solution with singular values below `max(m, n)·ε·σ_max` discarded.
pub fn solve_homological(d: &DMatrix<f64>, rhs: &[f64], lambda_rel: f64) -> Result<HomologicalSolution> {
    if rhs.len() != d.nrows() {
        return Err(Error::argument(format!(
            "right-hand side has {} rows, operator has {}",
            rhs.len(),
            d.nrows()
        )));
    }
    if !(lambda_rel >= 0.0) {
        return Err(Error::argument(format!("ridge parameter {lambda_rel} must be nonnegative")));
    }
    if rhs.iter().any(|x| !x.is_finite()) || d.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite entries in the homological system".into()));
    }
    let b = DVector::from_column_slice(rhs);
    let b_norm = b.norm();
    if b_norm == 0.0 || d.ncols() == 0 {
        return Ok(HomologicalSolution {
            phi: vec![0.0; d.ncols()],
            residual: if b_norm == 0.0 { 0.0 } else { 1.0 },
            sigma_max: 0.0,
            rank: 0,
        });
    }
    let svd = d.clone().svd(true, true);
    let (u, vt) = match (&svd.u, &svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Numerical("singular value decomposition failed".into())),
    };
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let cutoff = d.nrows().max(d.ncols()) as f64 * f64::EPSILON * sigma_max;
    let lambda = lambda_rel * sigma_max * sigma_max;
    let mut coef = u.transpose() * &b;
    let mut rank = 0;
    for (c, &s) in coef.iter_mut().zip(sigma.iter()) {
        if s > cutoff {
            rank += 1;
            *c *= s / (s * s + lambda);
        } else {
            *c = 0.0;
        }
    }
    let phi = vt.transpose() * coef;
    let residual = (d * &phi - &b).norm() / b_norm;
    Ok(HomologicalSolution {
        phi: phi.as_slice().to_vec(),
        residual,
        sigma_max,
        rank,
    })
}
