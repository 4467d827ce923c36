//! Expectations over a centred normal distribution.

use std::f64::consts::PI;

/// Gauss–Hermite rule for `∫ e^{-x²} f(x) dx`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Nodes by Newton iteration on the orthonormal Hermite recurrence,
    /// which stays in range for orders in the hundreds.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Hermite order must be positive");
        const PI_M4: f64 = 0.751_125_544_464_942_5; // π^(-1/4)
        let n = order;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0_f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = PI_M4;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z_prev = z;
                z = z_prev - p1 / pp;
                if (z - z_prev).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        if n % 2 == 1 {
            // the Newton iterate for the middle node converges to round-off, not to 0
            x[n / 2] = 0.0;
        }
        GaussHermite { nodes: x, weights: w }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// `E[g(X)]` for `X ~ N(0, sigma²)`.
    pub fn normal_expectation<F: Fn(f64) -> f64>(&self, sigma: f64, g: F) -> f64 {
        let scale = std::f64::consts::SQRT_2 * sigma;
        self.integrate(|x| g(scale * x)) / PI.sqrt()
    }
}

/// `E[g(X)]` for `X ~ N(0, sigma²)` by the trapezoid rule on `±10 sigma`
/// with `intervals` panels (rounded up to even, so 0 is a node).
pub fn trapezoid_normal_expectation<F: Fn(f64) -> f64>(sigma: f64, intervals: usize, g: F) -> f64 {
    let intervals = intervals.max(2).next_multiple_of(2);
    let half_width = 10.0 * sigma;
    let h = 2.0 * half_width / intervals as f64;
    let norm = 1.0 / ((2.0 * PI).sqrt() * sigma);
    let density = |x: f64| norm * (-0.5 * (x / sigma).powi(2)).exp();
    let mut sum = 0.5 * (g(-half_width) * density(-half_width) + g(half_width) * density(half_width));
    for k in 1..intervals {
        let x = -half_width + k as f64 * h;
        sum += g(x) * density(x);
    }
    sum * h
}
