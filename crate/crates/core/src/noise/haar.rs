//! Haar basis of step one, restricted to a single unit segment.

use crate::error::{Error, Result};

/// Index `(level, position)` of a Haar function supported in `[0, 1)`.
///
/// Level 0 is the indicator of the segment; level `k >= 1` holds the `2^k`
/// dipoles of width `2^-k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HaarIndex {
    level: u32,
    position: usize,
}

/// Deepest level we accept. Keeps `2^(level+1)` inside `usize` and `f64` exact.
pub const MAX_LEVEL: u32 = 40;

impl HaarIndex {
    pub fn new(level: u32, position: usize) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::argument(format!("Haar level {level} exceeds {MAX_LEVEL}")));
        }
        if position >= 1usize << level {
            return Err(Error::argument(format!(
                "Haar position {position} outside [0, {}) at level {level}",
                1usize << level
            )));
        }
        Ok(Self { level, position })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn position(&self) -> usize {
        self.position
    }

    /// Position in the level-major flat ordering: `(0,0), (1,0), (1,1), (2,0), ...`.
    pub fn flat(&self) -> usize {
        if self.level == 0 {
            0
        } else {
            (1usize << self.level) - 1 + self.position
        }
    }

    pub fn from_flat(flat: usize) -> Self {
        if flat == 0 {
            return Self { level: 0, position: 0 };
        }
        let level = usize::BITS - 1 - (flat + 1).leading_zeros();
        Self {
            level,
            position: flat + 1 - (1usize << level),
        }
    }

    /// Half-open support `[start, end)`.
    pub fn support(&self) -> (f64, f64) {
        let width = (-(self.level as f64)).exp2();
        (self.position as f64 * width, (self.position + 1) as f64 * width)
    }

    /// Value at `t`, with `0 <= t < 1` assumed.
    pub fn value(&self, t: f64) -> f64 {
        if self.level == 0 {
            return 1.0;
        }
        let half_cell = (t * ((self.level + 1) as f64).exp2()).floor() as usize;
        if half_cell >> 1 != self.position {
            return 0.0;
        }
        let height = (self.level as f64 * 0.5).exp2();
        if half_cell & 1 == 0 {
            height
        } else {
            -height
        }
    }

    /// Exact integral of the function over `[0, s]`.
    pub fn integral_to(&self, s: f64) -> f64 {
        let (start, end) = self.support();
        if s <= start {
            return 0.0;
        }
        if self.level == 0 {
            return s.min(1.0);
        }
        if s >= end {
            return 0.0;
        }
        let height = (self.level as f64 * 0.5).exp2();
        let mid = 0.5 * (start + end);
        if s <= mid {
            height * (s - start)
        } else {
            height * (end - s)
        }
    }
}

/// Number of Haar functions on one segment with level `<= levels`.
pub fn count_up_to(levels: u32) -> usize {
    (1usize << (levels + 1)) - 1
}

/// Evaluate `h_{k,l}(t)` with argument checks.
pub fn haar_eval(idx: HaarIndex, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(idx.value(t))
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::argument(format!("time {t} outside [0, 1)")));
    }
    Ok(())
}

/// `∫₀¹ h_a h_b dt` by summing over dyadic cells of width `2^-grid_level`.
///
/// Exact whenever `grid_level` is at least one more than both levels, since the
/// integrand is then constant on each cell.
pub fn dyadic_inner_product(a: HaarIndex, b: HaarIndex, grid_level: u32) -> f64 {
    let cells = 1usize << grid_level;
    let width = (-(grid_level as f64)).exp2();
    (0..cells)
        .map(|m| {
            let t = m as f64 * width;
            a.value(t) * b.value(t)
        })
        .sum::<f64>()
        * width
}

/// Largest `|<h_a, h_b> - δ_ab|` over all index pairs up to `levels`.
pub fn orthonormality_defect(levels: u32) -> f64 {
    let n = count_up_to(levels);
    let grid = levels + 1;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let ip = dyadic_inner_product(HaarIndex::from_flat(i), HaarIndex::from_flat(j), grid);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((ip - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_values() {
        let h00 = HaarIndex::new(0, 0).unwrap();
        assert_eq!(haar_eval(h00, 0.5).unwrap(), 1.0);
        // level-1 dipoles have width 1/2: h_{1,0} lives on [0, 1/2)
        let h10 = HaarIndex::new(1, 0).unwrap();
        assert_eq!(haar_eval(h10, 0.125).unwrap(), 2f64.sqrt());
        assert_eq!(haar_eval(h10, 0.375).unwrap(), -(2f64.sqrt()));
        assert_eq!(haar_eval(h10, 0.75).unwrap(), 0.0);
        let h11 = HaarIndex::new(1, 1).unwrap();
        assert_eq!(haar_eval(h11, 0.75).unwrap(), -(2f64.sqrt()));
        let h23 = HaarIndex::new(2, 3).unwrap();
        assert_eq!(haar_eval(h23, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn breakpoints_are_half_open() {
        let h10 = HaarIndex::new(1, 0).unwrap();
        // left end belongs to the positive half, midpoint to the negative half
        assert!(h10.value(0.0) > 0.0);
        assert!(h10.value(0.25) < 0.0);
        assert_eq!(h10.value(0.5), 0.0);
        let h11 = HaarIndex::new(1, 1).unwrap();
        assert_eq!(h11.value(0.499_999_999), 0.0);
        assert!(h11.value(0.5) > 0.0);
    }

    #[test]
    fn invalid_indices_rejected() {
        assert!(HaarIndex::new(0, 1).is_err());
        assert!(HaarIndex::new(2, 4).is_err());
        assert!(haar_eval(HaarIndex::new(1, 0).unwrap(), 1.0).is_err());
        assert!(haar_eval(HaarIndex::new(1, 0).unwrap(), -0.1).is_err());
    }

    #[test]
    fn flat_ordering_round_trips() {
        for flat in 0..count_up_to(7) {
            let idx = HaarIndex::from_flat(flat);
            assert_eq!(idx.flat(), flat);
            assert!(HaarIndex::new(idx.level(), idx.position()).is_ok());
        }
        assert_eq!(count_up_to(2), 7);
    }

    #[test]
    fn orthonormal_up_to_level_six() {
        assert!(orthonormality_defect(6) <= 1e-12);
    }

    #[test]
    fn dipoles_integrate_to_zero() {
        for flat in 1..count_up_to(5) {
            let idx = HaarIndex::from_flat(flat);
            assert_eq!(idx.integral_to(1.0), 0.0);
            let (start, end) = idx.support();
            let mid = 0.5 * (start + end);
            let peak = idx.integral_to(mid);
            assert!((peak - (idx.level() as f64 * 0.5).exp2() * (mid - start)).abs() < 1e-15);
        }
        assert_eq!(HaarIndex::from_flat(0).integral_to(0.25), 0.25);
    }
}
