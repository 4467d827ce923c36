//! Two-cavity photonic molecule.
//!
//! For a bare detuning `Δ0` and coupling `J` the super-modes are split by
//! `Δ = √(Δ0² + 4J²)`. With `Δ0 ~ N(0, σ_f²)` the mean and spread of `Δ` have
//! simple limits: `√(2/π) σ_f` and `√(1 − 2/π) σ_f` without coupling, and
//! `2J + σ_f²/4J` and `σ_f²/(2√2 J)` when `σ_f ≪ J`.
//!
//! `sigma_f` here is the standard deviation of `Δ0` itself. A two-site
//! ensemble that perturbs each cavity independently with standard deviation
//! `s` has `Δ0` spread `√2 s`; use [`MoleculeParams::from_per_cavity`] and
//! [`MoleculeParams::per_cavity_sigma`] to move between the two.
//!
//! Moments are evaluated as `2J + E[Δ0² / (Δ + 2J)]`, which avoids the
//! cancellation in `Δ − 2J` at weak disorder.

use std::f64::consts::{FRAC_2_PI, PI, SQRT_2};
use std::sync::OnceLock;

use crate::error::{CcaError, Result};
use crate::quadrature::{trapezoid_normal_expectation, GaussHermite};

const GH_LOW: usize = 64;
const GH_HIGH: usize = 128;
const GH_AGREEMENT: f64 = 1e-10;
const TRAPEZOID_INTERVALS: usize = 400_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoleculeParams {
    pub j: f64,
    pub sigma_f: f64,
}

impl MoleculeParams {
    pub fn new(j: f64, sigma_f: f64) -> Result<Self> {
        if !j.is_finite() || j < 0.0 {
            return Err(CcaError::invalid("j", format!("must be finite and >= 0, got {j}")));
        }
        if !sigma_f.is_finite() || sigma_f < 0.0 {
            return Err(CcaError::invalid("sigma_f", format!("must be finite and >= 0, got {sigma_f}")));
        }
        Ok(MoleculeParams { j, sigma_f })
    }

    /// Molecule whose two cavities are each detuned with standard deviation
    /// `per_cavity_sigma`.
    pub fn from_per_cavity(j: f64, per_cavity_sigma: f64) -> Result<Self> {
        Self::new(j, SQRT_2 * per_cavity_sigma)
    }

    pub fn per_cavity_sigma(&self) -> f64 {
        self.sigma_f / SQRT_2
    }
}

pub fn molecule_separation(delta0: f64, j: f64) -> f64 {
    delta0.hypot(2.0 * j)
}

/// `Δ − 2J`, computed without cancellation.
fn excess(delta0: f64, j: f64) -> f64 {
    let denom = molecule_separation(delta0, j) + 2.0 * j;
    if denom == 0.0 {
        0.0
    } else {
        delta0 * delta0 / denom
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoleculeMoments {
    pub mean: f64,
    pub std: f64,
    /// `E[Δ²]` reassembled from the computed mean and variance.
    pub second_moment: f64,
}

fn rules() -> &'static (GaussHermite, GaussHermite) {
    static RULES: OnceLock<(GaussHermite, GaussHermite)> = OnceLock::new();
    RULES.get_or_init(|| (GaussHermite::new(GH_LOW), GaussHermite::new(GH_HIGH)))
}

/// Mean and standard deviation of the splitting over the detuning
/// distribution.
///
/// Gauss–Hermite of order 128 is accepted when it agrees with order 64 and
/// reproduces `E[Δ²] = σ_f² + 4J²`; otherwise (kinked integrands near
/// `J ≪ σ_f`) a wide trapezoid rule is used.
pub fn molecule_moments(p: &MoleculeParams) -> MoleculeMoments {
    let (j, sigma) = (p.j, p.sigma_f);
    if sigma == 0.0 {
        return MoleculeMoments {
            mean: 2.0 * j,
            std: 0.0,
            second_moment: 4.0 * j * j,
        };
    }
    let exact_second = sigma * sigma + 4.0 * j * j;
    let assemble = |ex: f64, var: f64| {
        let mean = 2.0 * j + ex;
        MoleculeMoments {
            mean,
            std: var.max(0.0).sqrt(),
            second_moment: mean * mean + var,
        }
    };

    let (low, high) = rules();
    let gh = |rule: &GaussHermite| {
        let ex = rule.normal_expectation(sigma, |x| excess(x, j));
        let var = rule.normal_expectation(sigma, |x| (excess(x, j) - ex).powi(2));
        (ex, var)
    };
    let (ex_lo, var_lo) = gh(low);
    let (ex_hi, var_hi) = gh(high);
    let agree = |a: f64, b: f64| (a - b).abs() <= GH_AGREEMENT * b.abs().max(f64::MIN_POSITIVE);
    if agree(ex_lo, ex_hi) && agree(var_lo, var_hi) {
        let m = assemble(ex_hi, var_hi);
        if (m.second_moment - exact_second).abs() <= 1e-12 * exact_second {
            return m;
        }
    }

    let ex = trapezoid_normal_expectation(sigma, TRAPEZOID_INTERVALS, |x| excess(x, j));
    let var = trapezoid_normal_expectation(sigma, TRAPEZOID_INTERVALS, |x| (excess(x, j) - ex).powi(2));
    assemble(ex, var)
}

pub fn molecule_mean_separation(p: &MoleculeParams) -> f64 {
    molecule_moments(p).mean
}

pub fn molecule_std_separation(p: &MoleculeParams) -> f64 {
    molecule_moments(p).std
}

/// σ/μ of the splitting when coupling is absent: the half-normal ratio
/// `√(π/2 − 1)`.
pub fn uncoupled_ratio() -> f64 {
    (PI / 2.0 - 1.0).sqrt()
}

/// `2J + σ_f²/(4J)`; undefined (NaN) at `J = 0`.
pub fn strong_coupling_mean(p: &MoleculeParams) -> f64 {
    if p.j == 0.0 {
        return f64::NAN;
    }
    2.0 * p.j + p.sigma_f * p.sigma_f / (4.0 * p.j)
}

/// Leading-order spread `σ_f²/(2√2 J)`; undefined (NaN) at `J = 0`.
pub fn strong_coupling_std(p: &MoleculeParams) -> f64 {
    if p.j == 0.0 {
        return f64::NAN;
    }
    p.sigma_f * p.sigma_f / (2.0 * SQRT_2 * p.j)
}

pub fn uncoupled_mean(p: &MoleculeParams) -> f64 {
    FRAC_2_PI.sqrt() * p.sigma_f
}

pub fn uncoupled_std(p: &MoleculeParams) -> f64 {
    (1.0 - FRAC_2_PI).sqrt() * p.sigma_f
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(j: f64, s: f64) -> MoleculeParams {
        MoleculeParams::new(j, s).unwrap()
    }

    #[test]
    fn separation_examples() {
        assert_eq!(molecule_separation(0.0, 1.0), 2.0);
        assert_eq!(molecule_separation(3.0, 2.0), 5.0);
        assert_eq!(molecule_separation(1.5, 0.0), 1.5);
        assert_eq!(molecule_separation(-1.5, 0.0), 1.5);
        assert_eq!(molecule_separation(-3.0, 2.0), molecule_separation(3.0, 2.0));
    }

    #[test]
    fn clean_molecule() {
        assert_eq!(molecule_mean_separation(&params(1.0, 0.0)), 2.0);
        assert_eq!(molecule_std_separation(&params(1.0, 0.0)), 0.0);
    }

    #[test]
    fn uncoupled_limits() {
        let m = molecule_moments(&params(0.0, 1.0));
        assert_abs_diff_eq!(m.mean, 0.797_884_560_8, epsilon = 1e-9);
        assert_abs_diff_eq!(m.std, 0.602_810_275_0, epsilon = 1e-9);
    }

    #[test]
    fn weak_disorder_mean() {
        assert_abs_diff_eq!(molecule_mean_separation(&params(1.0, 0.2)), 2.01, epsilon = 1e-3);
    }

    #[test]
    fn ratio_value() {
        assert_abs_diff_eq!(uncoupled_ratio(), 0.755_510_639_762_867, epsilon = 1e-14);
        let half_normal = (1.0 - FRAC_2_PI).sqrt() / FRAC_2_PI.sqrt();
        assert_abs_diff_eq!(uncoupled_ratio(), half_normal, epsilon = 1e-14);
        for s in [0.3, 1.0, 2.7] {
            let m = molecule_moments(&params(0.0, s));
            assert_abs_diff_eq!(m.std / m.mean, uncoupled_ratio(), epsilon = 1e-7);
        }
    }

    #[test]
    fn second_moment_identity() {
        for (j, s) in [(0.0, 1.0), (0.5, 0.1), (1.0, 0.5), (1.0, 5.0), (0.1, 3.0), (2.0, 0.01)] {
            let m = molecule_moments(&params(j, s));
            assert_relative_eq!(m.second_moment, s * s + 4.0 * j * j, max_relative = 1e-8);
        }
    }

    #[test]
    fn bridge_round_trip() {
        let p = MoleculeParams::from_per_cavity(1.0, 0.25).unwrap();
        assert_relative_eq!(p.sigma_f, 0.25 * SQRT_2);
        assert_relative_eq!(p.per_cavity_sigma(), 0.25);
    }

    #[test]
    fn invalid_params() {
        assert!(MoleculeParams::new(-1.0, 0.0).is_err());
        assert!(MoleculeParams::new(1.0, -0.1).is_err());
    }
}
