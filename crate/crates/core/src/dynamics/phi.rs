//! `φ`-functions of exponential integrators.

use num_complex::Complex64;

/// `[φ₁(z), φ₂(z), φ₃(z)]` with `φ_k(z) = Σ_{n>=0} z^n / (n+k)!`.
///
/// Taylor series near the origin, where the closed forms cancel badly;
/// the recurrence `φ_{k+1} = (φ_k − 1/k!) / z` elsewhere.
pub fn phi123(z: Complex64) -> [Complex64; 3] {
    if z.norm() < 1.0 {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let k = k + 1;
            // term_n = z^n / (n+k)!
            let mut term = Complex64::new(1.0 / factorial(k), 0.0);
            let mut acc = term;
            for n in 1..30 {
                term = term * z / (n + k) as f64;
                acc += term;
            }
            *slot = acc;
        }
        out
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        [p1, p2, p3]
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Per-mode coefficients of the fourth-order Cox–Matthews scheme for
/// `u̇ = c u + N(u)` with step `h`.
#[derive(Debug, Clone, Copy)]
pub struct EtdCoefficients {
    pub e_full: Complex64,
    pub e_half: Complex64,
    pub q: Complex64,
    pub f1: Complex64,
    pub f2: Complex64,
    pub f3: Complex64,
}

impl EtdCoefficients {
    pub fn new(c: Complex64, h: f64) -> Self {
        let z = c * h;
        let [p1, p2, p3] = phi123(z);
        let [half1, _, _] = phi123(z * 0.5);
        Self {
            e_full: z.exp(),
            e_half: (z * 0.5).exp(),
            q: half1 * (0.5 * h),
            f1: (p1 - p2 * 3.0 + p3 * 4.0) * h,
            f2: (p2 - p3 * 2.0) * h,
            f3: (p3 * 4.0 - p2) * h,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed(z: Complex64) -> [Complex64; 3] {
        let e = z.exp();
        [(e - 1.0) / z, (e - 1.0 - z) / (z * z), (e - 1.0 - z - z * z * 0.5) / (z * z * z)]
    }

    #[test]
    fn series_and_closed_form_agree_on_the_switch() {
        for z in [
            Complex64::new(0.99, 0.0),
            Complex64::new(-1.01, 0.0),
            Complex64::new(0.3, 0.9),
            Complex64::new(-0.7, -0.75),
        ] {
            let a = phi123(z);
            let b = closed(z);
            for k in 0..3 {
                assert!((a[k] - b[k]).norm() < 1e-12, "z = {z}, k = {k}");
            }
        }
    }

    #[test]
    fn origin_limits() {
        let [p1, p2, p3] = phi123(Complex64::new(0.0, 0.0));
        assert!((p1.re - 1.0).abs() < 1e-16);
        assert!((p2.re - 0.5).abs() < 1e-16);
        assert!((p3.re - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn weights_sum_to_duhamel_factor() {
        for c in [Complex64::new(-3.0, 0.0), Complex64::new(-0.01, 5.0), Complex64::new(0.0, 0.0)] {
            let h = 0.125;
            let k = EtdCoefficients::new(c, h);
            let sum = k.f1 + k.f2 * 4.0 + k.f3;
            let exact = if c.norm() == 0.0 { Complex64::new(h, 0.0) } else { ((c * h).exp() - 1.0) / c };
            assert!((sum - exact).norm() < 1e-15);
        }
    }
}
