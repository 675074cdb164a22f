use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Truncated Fourier coefficients `u_k` of `u(x) = Σ u_k e^{ikx}` on the 1-D torus.
///
/// Coefficients are stored in FFT order: index `i` holds wavenumber `i` for
/// `i <= N/2` and `i - N` above, so the wavenumbers are `-N/2+1 ..= N/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    coeffs: Vec<Complex64>,
}

impl SpectralState {
    pub fn zeros(n_modes: usize) -> Result<Self> {
        check_size(n_modes)?;
        Ok(Self {
            coeffs: vec![Complex64::new(0.0, 0.0); n_modes],
        })
    }

    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        check_size(coeffs.len())?;
        Ok(Self { coeffs })
    }

    /// State with the listed `(wavenumber, coefficient)` pairs and zeros elsewhere.
    pub fn from_modes(n_modes: usize, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut s = Self::zeros(n_modes)?;
        for &(k, c) in modes {
            let i = Self::index_of(n_modes, k)
                .ok_or_else(|| Error::argument(format!("wavenumber {k} not representable with {n_modes} modes")))?;
            s.coeffs[i] += c;
        }
        Ok(s)
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn wavenumber(n_modes: usize, index: usize) -> i64 {
        if index <= n_modes / 2 {
            index as i64
        } else {
            index as i64 - n_modes as i64
        }
    }

    pub fn index_of(n_modes: usize, k: i64) -> Option<usize> {
        let half = (n_modes / 2) as i64;
        if k > half || k <= -half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((n_modes as i64 + k) as usize)
        }
    }

    pub fn get(&self, k: i64) -> Option<Complex64> {
        Self::index_of(self.n_modes(), k).map(|i| self.coeffs[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `(Σ k² |u_k|²)^{1/2}`, monitored as a higher-regularity proxy.
    pub fn sobolev_norm(&self) -> f64 {
        let n = self.n_modes();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = Self::wavenumber(n, i) as f64;
                k * k * c.norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n_modes() != other.n_modes() {
            return Err(Error::argument(format!(
                "state sizes differ: {} vs {}",
                self.n_modes(),
                other.n_modes()
            )));
        }
        Ok(())
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * alpha;
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }

    /// Wavenumbers of the `n_resolved` lowest modes, `-n/2+1 ..= n/2`.
    pub fn resolved_wavenumbers(n_resolved: usize) -> Vec<i64> {
        let half = (n_resolved / 2) as i64;
        (-half + 1..=half).collect()
    }

    fn check_resolved(&self, n_resolved: usize) -> Result<()> {
        if n_resolved < 2 || !n_resolved.is_multiple_of(2) || n_resolved > self.n_modes() {
            return Err(Error::argument(format!(
                "resolved mode count {n_resolved} must be even, at least 2 and at most {}",
                self.n_modes()
            )));
        }
        Ok(())
    }

    /// Real components of the resolved modes: real parts first, then imaginary
    /// parts, each in ascending wavenumber.
    pub fn resolved_components(&self, n_resolved: usize) -> Result<Vec<f64>> {
        self.check_resolved(n_resolved)?;
        let ks = Self::resolved_wavenumbers(n_resolved);
        let n = self.n_modes();
        let vals: Vec<Complex64> = ks.iter().map(|&k| self.coeffs[Self::index_of(n, k).unwrap()]).collect();
        Ok(vals.iter().map(|c| c.re).chain(vals.iter().map(|c| c.im)).collect())
    }

    /// Inverse of [`resolved_components`](Self::resolved_components), zero outside the resolved set.
    pub fn from_resolved(n_modes: usize, n_resolved: usize, comps: &[f64]) -> Result<Self> {
        let mut s = Self::zeros(n_modes)?;
        s.check_resolved(n_resolved)?;
        if comps.len() != 2 * n_resolved {
            return Err(Error::argument(format!("expected {} components", 2 * n_resolved)));
        }
        for (j, &k) in Self::resolved_wavenumbers(n_resolved).iter().enumerate() {
            let i = Self::index_of(n_modes, k).unwrap();
            s.coeffs[i] = Complex64::new(comps[j], comps[n_resolved + j]);
        }
        Ok(s)
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::argument(format!("mode count {n} must be even and at least 2")));
    }
    Ok(())
}

/// `‖u‖` in `H`.
pub fn norm_h(u: &SpectralState) -> f64 {
    u.norm()
}

/// `‖u - v‖` in `H`.
pub fn dist_h(u: &SpectralState, v: &SpectralState) -> Result<f64> {
    Ok(u.sub(v)?.norm())
}

/// Transform between grid values `u(2πj/N)` and coefficients.
pub struct SpectralTransform {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl SpectralTransform {
    pub fn new(n_modes: usize) -> Result<Self> {
        check_size(n_modes)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            n: n_modes,
            forward: planner.plan_fft_forward(n_modes),
            inverse: planner.plan_fft_inverse(n_modes),
        })
    }

    pub fn to_physical(&self, u: &SpectralState) -> Result<Vec<Complex64>> {
        if u.n_modes() != self.n {
            return Err(Error::argument("state size does not match transform"));
        }
        let mut buf = u.coeffs.clone();
        self.inverse.process(&mut buf);
        Ok(buf)
    }

    pub fn to_spectral(&self, values: &[Complex64]) -> Result<SpectralState> {
        if values.len() != self.n {
            return Err(Error::argument("grid size does not match transform"));
        }
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        SpectralState::from_coeffs(buf)
    }
}
