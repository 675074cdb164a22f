//! Vector forcing `η⃗(t) = Σ_{j∈M} a_j (η_j^re(t) + i η_j^im(t)) e_j` on one unit segment.

use num_complex::Complex64;
use rand::Rng;

use super::haar::count_up_to;
use super::path::{cell_count, HaarNoisePath, RedNoiseSpec};
use crate::dynamics::SpectralState;
use crate::error::{Error, Result};
use crate::rng::{stream, StreamDomain};

/// Forced modes, their amplitudes and the scalar noise law shared by all channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSpec {
    modes: Vec<i64>,
    amplitudes: Vec<f64>,
    noise: RedNoiseSpec,
}

impl ForcingSpec {
    pub fn new(modes: Vec<i64>, amplitudes: Vec<f64>, noise: RedNoiseSpec) -> Result<Self> {
        if modes.len() != amplitudes.len() {
            return Err(Error::config(format!(
                "{} forced modes but {} amplitudes",
                modes.len(),
                amplitudes.len()
            )));
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(Error::config(format!("forced mode {m} listed twice")));
            }
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::config("force amplitudes must be finite"));
        }
        Ok(Self {
            modes,
            amplitudes,
            noise,
        })
    }

    pub fn modes(&self) -> &[i64] {
        &self.modes
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn noise(&self) -> &RedNoiseSpec {
        &self.noise
    }

    /// Same modes and noise law with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            ..self.clone()
        }
    }

    /// Almost-sure bound on `sup_t ‖η⃗(t)‖`.
    pub fn sup_bound(&self) -> f64 {
        let energy: f64 = self.amplitudes.iter().map(|a| a * a).sum();
        energy.sqrt() * 2f64.sqrt() * self.noise.sup_bound()
    }

    /// Draw all channels from one stream: mode order, real channel before imaginary.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, segment: u64) -> ForceProfile {
        let paths = self
            .modes
            .iter()
            .map(|_| [self.noise.sample(rng, segment), self.noise.sample(rng, segment)])
            .collect();
        ForceProfile {
            modes: self.modes.clone(),
            amplitudes: self.amplitudes.clone(),
            paths,
        }
    }

    /// The forcing on unit segment `segment` of trajectory `trajectory`.
    pub fn sample_stream(&self, master: u64, domain: StreamDomain, trajectory: u64, segment: u64) -> ForceProfile {
        self.sample(&mut stream(master, domain, trajectory, segment), segment)
    }

    pub fn zero_profile(&self) -> ForceProfile {
        let zero = HaarNoisePath::from_draws(&self.noise, vec![0.0; self.noise.draw_count()], 0)
            .expect("draw count matches spec");
        ForceProfile {
            modes: self.modes.clone(),
            amplitudes: self.amplitudes.clone(),
            paths: self.modes.iter().map(|_| [zero.clone(), zero.clone()]).collect(),
        }
    }
}

/// One realization of the vector force on a unit segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceProfile {
    modes: Vec<i64>,
    amplitudes: Vec<f64>,
    paths: Vec<[HaarNoisePath; 2]>,
}

impl ForceProfile {
    pub fn from_paths(modes: Vec<i64>, amplitudes: Vec<f64>, paths: Vec<[HaarNoisePath; 2]>) -> Result<Self> {
        if modes.len() != amplitudes.len() || modes.len() != paths.len() {
            return Err(Error::argument("modes, amplitudes and paths must have equal length"));
        }
        let levels = paths.first().map(|p| p[0].levels());
        if paths.iter().flatten().any(|p| Some(p.levels()) != levels) {
            return Err(Error::argument("all channels must share the Haar truncation level"));
        }
        Ok(Self {
            modes,
            amplitudes,
            paths,
        })
    }

    pub fn modes(&self) -> &[i64] {
        &self.modes
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn paths(&self) -> &[[HaarNoisePath; 2]] {
        &self.paths
    }

    /// Haar truncation level `K` of the channels (0 when no mode is forced).
    pub fn levels(&self) -> u32 {
        self.paths.first().map_or(0, |p| p[0].levels())
    }

    fn check_modes(&self, n_modes: usize) -> Result<Vec<usize>> {
        self.modes
            .iter()
            .map(|&k| {
                SpectralState::index_of(n_modes, k)
                    .ok_or_else(|| Error::config(format!("forced mode {k} not representable with {n_modes} modes")))
            })
            .collect()
    }

    /// `η⃗(t)` as a state with `n_modes` coefficients.
    pub fn eval(&self, t: f64, n_modes: usize) -> Result<SpectralState> {
        super::haar::check_time(t)?;
        let indices = self.check_modes(n_modes)?;
        let mut state = SpectralState::zeros(n_modes)?;
        for ((&idx, a), [re, im]) in indices.iter().zip(&self.amplitudes).zip(&self.paths) {
            state.coeffs_mut()[idx] = Complex64::new(a * re.value(t), a * im.value(t));
        }
        Ok(state)
    }

    /// Sparse forcing per dyadic cell of width `2^-(K+1)`: `(coefficient index, value)` pairs.
    pub fn cell_forcing(&self, n_modes: usize) -> Result<Vec<Vec<(usize, Complex64)>>> {
        let indices = self.check_modes(n_modes)?;
        let cells = cell_count(self.levels());
        let mut out = vec![Vec::with_capacity(indices.len()); cells];
        for ((&idx, a), [re, im]) in indices.iter().zip(&self.amplitudes).zip(&self.paths) {
            let re = re.cell_values();
            let im = im.cell_values();
            for (m, cell) in out.iter_mut().enumerate() {
                cell.push((idx, Complex64::new(a * re[m], a * im[m])));
            }
        }
        Ok(out)
    }

    /// `∫₀¹ ‖η⃗(t)‖² dt` by exact quadrature over the dyadic cells.
    pub fn l2_norm_sq_quadrature(&self) -> f64 {
        let cells = cell_count(self.levels());
        let width = 1.0 / cells as f64;
        let mut total = 0.0;
        for (a, [re, im]) in self.amplitudes.iter().zip(&self.paths) {
            let re = re.cell_values();
            let im = im.cell_values();
            total += a * a * re.iter().chain(&im).map(|v| v * v).sum::<f64>() * width;
        }
        total
    }

    /// Dimension of the truncated coefficient space with Haar levels `<= k_ctl`.
    pub fn e_dim(&self, k_ctl: u32) -> usize {
        self.modes.len() * 2 * count_up_to(k_ctl)
    }

    fn check_truncation(&self, k_ctl: u32) -> Result<()> {
        if !self.paths.is_empty() && k_ctl > self.levels() {
            return Err(Error::argument(format!(
                "truncation level {k_ctl} exceeds the noise level {}",
                self.levels()
            )));
        }
        Ok(())
    }

    /// Flatten the draws with level `<= k_ctl` into one vector, ordered by
    /// (mode, channel, Haar index).
    pub fn embed(&self, k_ctl: u32) -> Result<Vec<f64>> {
        self.check_truncation(k_ctl)?;
        let per = count_up_to(k_ctl);
        Ok(self
            .paths
            .iter()
            .flat_map(|pair| pair.iter().flat_map(|p| p.draws()[..per].iter().copied()))
            .collect())
    }

    /// Inverse of [`embed`](Self::embed): replace the truncated draws, keep the rest.
    pub fn with_embedded(&self, k_ctl: u32, coords: &[f64]) -> Result<ForceProfile> {
        self.check_truncation(k_ctl)?;
        if coords.len() != self.e_dim(k_ctl) {
            return Err(Error::argument(format!(
                "expected {} coefficients, got {}",
                self.e_dim(k_ctl),
                coords.len()
            )));
        }
        let per = count_up_to(k_ctl);
        let mut out = self.clone();
        for (chunk, path) in coords.chunks(per).zip(out.paths.iter_mut().flatten()) {
            path.draws_mut()[..per].copy_from_slice(chunk);
        }
        Ok(out)
    }

    /// Weights `a_j² c_k²` turning the Euclidean product of embedded vectors
    /// into the `L₂(0,1; H)` product of the forces.
    pub fn embedding_weights(&self, k_ctl: u32) -> Result<Vec<f64>> {
        self.check_truncation(k_ctl)?;
        let per = count_up_to(k_ctl);
        let mut w = Vec::with_capacity(self.e_dim(k_ctl));
        for (a, pair) in self.amplitudes.iter().zip(&self.paths) {
            for path in pair {
                for flat in 0..per {
                    let level = super::haar::HaarIndex::from_flat(flat).level() as usize;
                    let c = path.coefficients()[level];
                    w.push(a * a * c * c);
                }
            }
        }
        Ok(w)
    }

    /// The force whose embedded coordinates are the unit vector `i` and whose
    /// other draws vanish.
    pub fn basis_direction(&self, k_ctl: u32, i: usize) -> Result<ForceProfile> {
        let mut coords = vec![0.0; self.e_dim(k_ctl)];
        if i >= coords.len() {
            return Err(Error::argument(format!("basis index {i} out of range")));
        }
        coords[i] = 1.0;
        let mut zero = self.clone();
        for path in zero.paths.iter_mut().flatten() {
            path.draws_mut().iter_mut().for_each(|x| *x = 0.0);
        }
        zero.with_embedded(k_ctl, &coords)
    }

    /// Same draws applied to zero: a profile with every draw set to 0.
    pub fn zeroed(&self) -> ForceProfile {
        let mut zero = self.clone();
        for path in zero.paths.iter_mut().flatten() {
            path.draws_mut().iter_mut().for_each(|x| *x = 0.0);
        }
        zero
    }
}

/// Weighted Euclidean norm `(Σ w_i x_i²)^{1/2}`.
pub fn weighted_norm(coords: &[f64], weights: &[f64]) -> f64 {
    coords.iter().zip(weights).map(|(x, w)| w * x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseDensity;

    fn spec(levels: u32) -> ForcingSpec {
        let noise = RedNoiseSpec::power_law(1.0, 2.0, levels, NoiseDensity::Uniform).unwrap();
        ForcingSpec::new(vec![0, 1, -2], vec![0.5, 0.3, 0.2], noise).unwrap()
    }

    #[test]
    fn empty_mode_set_gives_zero_state() {
        let noise = RedNoiseSpec::power_law(1.0, 2.0, 3, NoiseDensity::Uniform).unwrap();
        let f = ForcingSpec::new(vec![], vec![], noise).unwrap().sample_stream(1, StreamDomain::Force, 0, 0);
        for t in [0.0, 0.4, 0.9] {
            assert_eq!(f.eval(t, 16).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn constant_single_mode_force() {
        let noise = RedNoiseSpec::power_law(1.0, 2.0, 0, NoiseDensity::Uniform).unwrap();
        let re = HaarNoisePath::from_draws(&noise, vec![1.0], 0).unwrap();
        let im = HaarNoisePath::from_draws(&noise, vec![0.0], 0).unwrap();
        let f = ForceProfile::from_paths(vec![3], vec![2.0], vec![[re, im]]).unwrap();
        let s = f.eval(0.7, 16).unwrap();
        assert_eq!(s.get(3), Some(Complex64::new(2.0, 0.0)));
        assert_eq!(s.norm(), 2.0);
    }

    #[test]
    fn unrepresentable_mode_is_rejected() {
        let f = spec(2).sample_stream(1, StreamDomain::Force, 0, 0);
        assert!(f.eval(0.1, 2).is_err());
    }

    #[test]
    fn embedding_round_trip_and_errors() {
        let f = spec(4).sample_stream(3, StreamDomain::Force, 0, 0);
        let coords = f.embed(2).unwrap();
        assert_eq!(coords.len(), 3 * 2 * 7);
        assert_eq!(f.with_embedded(2, &coords).unwrap(), f);
        assert!(f.embed(5).is_err());
        assert!(f.with_embedded(2, &coords[1..]).is_err());
        assert!(f.zeroed().embed(4).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn embedded_norm_matches_quadrature() {
        let f = spec(5).sample_stream(4, StreamDomain::Force, 0, 0);
        let coords = f.embed(5).unwrap();
        let w = f.embedding_weights(5).unwrap();
        let lhs = weighted_norm(&coords, &w).powi(2);
        assert!((lhs - f.l2_norm_sq_quadrature()).abs() < 1e-12);
    }

    #[test]
    fn force_sup_bound_holds_on_grid() {
        let s = spec(6);
        for traj in 0..20 {
            let f = s.sample_stream(9, StreamDomain::Force, traj, 0);
            let cells = f.cell_forcing(16).unwrap();
            for cell in cells {
                let n: f64 = cell.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
                assert!(n <= s.sup_bound());
            }
        }
    }

    #[test]
    fn basis_direction_has_single_draw() {
        let f = spec(3).sample_stream(2, StreamDomain::Force, 0, 0);
        let d = f.basis_direction(1, 4).unwrap();
        let coords = d.embed(3).unwrap();
        assert_eq!(coords.iter().filter(|&&x| x != 0.0).count(), 1);
        // index 4 of the k_ctl=1 layout: mode 0, imaginary channel, flat 1
        assert_eq!(d.paths()[0][1].draws()[1], 1.0);
    }
}
