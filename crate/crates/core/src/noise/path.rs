//! Red-noise paths: random Haar series with bounded i.i.d. draws and
//! coefficients decaying like `C n^-q 2^-n/2`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::haar::{check_time, count_up_to, HaarIndex, MAX_LEVEL};
use crate::error::{Error, Result};

/// Law of the Haar draws. All variants live on `[-1, 1]`, are Lipschitz there
/// and have `p(0) != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseDensity {
    /// `p(x) = 1/2`.
    #[default]
    Uniform,
    /// `p(x) = 1 - |x|`.
    Triangular,
}

impl NoiseDensity {
    pub fn pdf(&self, x: f64) -> f64 {
        if !(-1.0..=1.0).contains(&x) {
            return 0.0;
        }
        match self {
            NoiseDensity::Uniform => 0.5,
            NoiseDensity::Triangular => 1.0 - x.abs(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match self {
            NoiseDensity::Uniform => 0.5 * (x + 1.0),
            NoiseDensity::Triangular => {
                if x <= 0.0 {
                    0.5 * (1.0 + x) * (1.0 + x)
                } else {
                    1.0 - 0.5 * (1.0 - x) * (1.0 - x)
                }
            }
        }
    }

    /// `E ξ²`.
    pub fn second_moment(&self) -> f64 {
        match self {
            NoiseDensity::Uniform => 1.0 / 3.0,
            NoiseDensity::Triangular => 1.0 / 6.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            NoiseDensity::Uniform => 2.0 * rng.gen::<f64>() - 1.0,
            NoiseDensity::Triangular => rng.gen::<f64>() + rng.gen::<f64>() - 1.0,
        }
    }
}

impl FromStr for NoiseDensity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(NoiseDensity::Uniform),
            "triangular" => Ok(NoiseDensity::Triangular),
            other => Err(Error::config(format!("unknown noise density `{other}`"))),
        }
    }
}

impl fmt::Display for NoiseDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseDensity::Uniform => f.write_str("uniform"),
            NoiseDensity::Triangular => f.write_str("triangular"),
        }
    }
}

/// Coefficients `c_0..c_K` and draw law of one scalar red noise.
#[derive(Debug, Clone, PartialEq)]
pub struct RedNoiseSpec {
    coeffs: Vec<f64>,
    bound_constant: f64,
    decay_exponent: f64,
    density: NoiseDensity,
}

impl RedNoiseSpec {
    /// `c_0` given, `c_n = c_0 n^-q 2^-n/2` for `1 <= n <= levels`.
    pub fn power_law(c0: f64, q: f64, levels: u32, density: NoiseDensity) -> Result<Self> {
        let coeffs = (0..=levels)
            .map(|n| {
                if n == 0 {
                    c0
                } else {
                    c0 * (n as f64).powf(-q) * (-(n as f64) * 0.5).exp2()
                }
            })
            .collect();
        Self::with_coefficients(coeffs, c0.abs(), q, density)
    }

    /// Explicit coefficients, checked against `|c_n| <= C n^-q 2^-n/2`.
    pub fn with_coefficients(
        coeffs: Vec<f64>,
        bound_constant: f64,
        decay_exponent: f64,
        density: NoiseDensity,
    ) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::config("red noise needs at least the level-0 coefficient"));
        }
        if coeffs.len() - 1 > MAX_LEVEL as usize {
            return Err(Error::config(format!("at most {MAX_LEVEL} Haar levels supported")));
        }
        if !(decay_exponent > 1.0) {
            return Err(Error::config(format!("decay exponent q = {decay_exponent} must exceed 1")));
        }
        if !bound_constant.is_finite() || bound_constant <= 0.0 {
            return Err(Error::config("decay constant C must be positive and finite"));
        }
        if coeffs[0] == 0.0 || !coeffs[0].is_finite() {
            return Err(Error::config("c_0 must be finite and nonzero"));
        }
        for (n, &c) in coeffs.iter().enumerate().skip(1) {
            let cap = bound_constant * (n as f64).powf(-decay_exponent) * (-(n as f64) * 0.5).exp2();
            if !c.is_finite() || c.abs() > cap * (1.0 + 1e-12) {
                return Err(Error::config(format!(
                    "coefficient c_{n} = {c} violates the red-noise decay bound {cap}"
                )));
            }
        }
        Ok(Self {
            coeffs,
            bound_constant,
            decay_exponent,
            density,
        })
    }

    pub fn levels(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn density(&self) -> NoiseDensity {
        self.density
    }

    pub fn draw_count(&self) -> usize {
        count_up_to(self.levels())
    }

    /// `Σ_k |c_k| 2^{k/2}`, an almost-sure bound on `sup |η(t)|`.
    pub fn sup_bound(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * (k as f64 * 0.5).exp2())
            .sum()
    }

    /// Bound on the sup-norm of the discarded levels `k > K` of the infinite series.
    pub fn truncation_bound(&self) -> f64 {
        let q = self.decay_exponent;
        let first = self.levels() as f64 + 1.0;
        // Σ_{n >= first} n^-q <= first^-q + ∫_first^∞ x^-q dx
        self.bound_constant * (first.powf(-q) + first.powf(1.0 - q) / (q - 1.0))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, segment: u64) -> HaarNoisePath {
        let draws = (0..self.draw_count()).map(|_| self.density.sample(rng)).collect();
        HaarNoisePath {
            coeffs: self.coeffs.clone(),
            draws,
            segment,
        }
    }
}

/// One realization of a red noise on a unit segment `[j, j+1)`, stored in
/// local time `t ∈ [0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarNoisePath {
    coeffs: Vec<f64>,
    draws: Vec<f64>,
    segment: u64,
}

impl HaarNoisePath {
    /// Build a path from explicit draws (flat level-major order).
    pub fn from_draws(spec: &RedNoiseSpec, draws: Vec<f64>, segment: u64) -> Result<Self> {
        if draws.len() != spec.draw_count() {
            return Err(Error::argument(format!(
                "expected {} Haar draws, got {}",
                spec.draw_count(),
                draws.len()
            )));
        }
        Ok(Self {
            coeffs: spec.coeffs.clone(),
            draws,
            segment,
        })
    }

    pub fn levels(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub(crate) fn draws_mut(&mut self) -> &mut [f64] {
        &mut self.draws
    }

    pub fn segment(&self) -> u64 {
        self.segment
    }

    pub fn draw(&self, idx: HaarIndex) -> f64 {
        self.draws[idx.flat()]
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.value(t))
    }

    pub(crate) fn value(&self, t: f64) -> f64 {
        let mut acc = self.coeffs[0] * self.draws[0];
        for k in 1..=self.levels() {
            let half_cell = (t * ((k + 1) as f64).exp2()).floor() as usize;
            let l = half_cell >> 1;
            let flat = (1usize << k) - 1 + l;
            let height = (k as f64 * 0.5).exp2();
            let h = if half_cell & 1 == 0 { height } else { -height };
            acc += self.coeffs[k as usize] * self.draws[flat] * h;
        }
        acc
    }

    /// Values on the `2^(K+1)` dyadic cells of width `2^-(K+1)`; the path is
    /// constant on each (a level-`K` dipole changes sign mid-support).
    pub fn cell_values(&self) -> Vec<f64> {
        let cells = cell_count(self.levels());
        let width = 1.0 / cells as f64;
        (0..cells).map(|m| self.value(m as f64 * width)).collect()
    }

    /// `∫₀^s η(t) dt` for `0 <= s <= 1`, summed exactly term by term.
    pub fn integral_to(&self, s: f64) -> f64 {
        self.draws
            .iter()
            .enumerate()
            .map(|(flat, xi)| {
                let idx = HaarIndex::from_flat(flat);
                self.coeffs[idx.level() as usize] * xi * idx.integral_to(s)
            })
            .sum()
    }

    /// `Σ_k |c_k| 2^{k/2}`.
    pub fn sup_bound(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * (k as f64 * 0.5).exp2())
            .sum()
    }
}

/// Number of cells of constancy of a path truncated at `levels`.
pub fn cell_count(levels: u32) -> usize {
    1usize << (levels + 1)
}

/// Sample a single path from a stream.
pub fn sample_path<R: Rng + ?Sized>(spec: &RedNoiseSpec, rng: &mut R) -> HaarNoisePath {
    spec.sample(rng, 0)
}
