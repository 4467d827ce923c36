//! Eigenvalues of small dense symmetric matrices by cyclic Jacobi rotations.
//!
//! Each sweep visits every off-diagonal pair `(p, q)` once and applies the
//! plane rotation that zeroes `a[p][q]`. Convergence is measured by the
//! off-diagonal Frobenius norm relative to the Frobenius norm of the input.
//! Eigenvectors are not accumulated.

use crate::error::{CcaError, Result};
use crate::lattice::SymmetricMatrix;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    /// Eigenvalues in THz, ascending.
    pub values: Vec<f64>,
    /// Number of Jacobi sweeps performed.
    pub iterations: usize,
    /// Off-diagonal Frobenius norm over the input Frobenius norm at exit.
    pub offdiag_residual: f64,
}

impl EigenSpectrum {
    pub fn separations(&self) -> Result<Vec<f64>> {
        separations(&self.values)
    }
}

/// Adjacent differences of an ascending spectrum.
pub fn separations(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(CcaError::invalid("spectrum", format!("need at least 2 values for separations, got {}", values.len())));
    }
    Ok(values.windows(2).map(|w| w[1] - w[0]).collect())
}

pub fn eigenvalues_symmetric(m: &SymmetricMatrix, tol: f64) -> Result<EigenSpectrum> {
    eigenvalues_symmetric_with(m, tol, DEFAULT_MAX_SWEEPS)
}

pub fn eigenvalues_symmetric_with(m: &SymmetricMatrix, tol: f64, max_sweeps: usize) -> Result<EigenSpectrum> {
    let n = m.dim();
    if n == 0 {
        return Err(CcaError::invalid("matrix", "dimension must be at least 1"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(CcaError::invalid("tol", format!("must be > 0, got {tol}")));
    }
    let mut a = m.as_slice().to_vec();
    let total = m.frobenius_norm_sq().sqrt();

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[p * n + q] * a[p * n + q];
            }
        }
        (2.0 * s).sqrt()
    };
    let relative = |off: f64| if total > 0.0 { off / total } else { 0.0 };

    let mut sweeps = 0;
    let mut residual = relative(off_norm(&a));
    while residual > tol {
        if sweeps == max_sweeps {
            return Err(CcaError::NotConverged { sweeps, residual });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, n, p, q);
            }
        }
        sweeps += 1;
        residual = relative(off_norm(&a));
    }

    let mut values: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    values.sort_by(f64::total_cmp);
    Ok(EigenSpectrum {
        values,
        iterations: sweeps,
        offdiag_residual: residual,
    })
}

/// Annihilates `a[p][q]` (p < q) with a Jacobi rotation, updating both
/// triangles so the working matrix stays exactly symmetric.
fn rotate(a: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[r * n + p];
        let arq = a[r * n + q];
        let new_rp = c * arp - s * arq;
        let new_rq = s * arp + c * arq;
        a[r * n + p] = new_rp;
        a[p * n + r] = new_rp;
        a[r * n + q] = new_rq;
        a[q * n + r] = new_rq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: &[&[f64]]) -> SymmetricMatrix {
        SymmetricMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn two_by_two_swap() {
        let s = eigenvalues_symmetric(&m(&[&[0.0, 1.0], &[1.0, 0.0]]), DEFAULT_TOLERANCE).unwrap();
        assert_abs_diff_eq!(s.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.values[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.separations().unwrap()[0], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn three_four_five() {
        let s = eigenvalues_symmetric(&m(&[&[1.5, 2.0], &[2.0, -1.5]]), DEFAULT_TOLERANCE).unwrap();
        assert_abs_diff_eq!(s.values[0], -2.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s.values[1], 2.5, epsilon = 1e-14);
    }

    #[test]
    fn one_by_one() {
        let s = eigenvalues_symmetric(&m(&[&[-0.7]]), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(s.values, vec![-0.7]);
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn empty_and_bad_tolerance_rejected() {
        assert!(eigenvalues_symmetric(&SymmetricMatrix::zeros(0), DEFAULT_TOLERANCE).is_err());
        assert!(eigenvalues_symmetric(&SymmetricMatrix::zeros(2), 0.0).is_err());
    }

    #[test]
    fn diagonal_input_is_sorted_exactly() {
        let d = [0.3, -2.0, 5.5, 0.0, -0.1];
        let s = eigenvalues_symmetric(&SymmetricMatrix::from_diagonal(&d), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(s.values, vec![-2.0, -0.1, 0.0, 0.3, 5.5]);
    }

    #[test]
    fn sweep_cap_reports_residual() {
        let mat = m(&[&[1.0, 0.5, 0.2], &[0.5, -1.0, 0.3], &[0.2, 0.3, 0.4]]);
        match eigenvalues_symmetric_with(&mat, 1e-300, 1) {
            Err(CcaError::NotConverged { sweeps: 1, residual }) => assert!(residual > 0.0),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn separation_edge_cases() {
        assert_eq!(separations(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(separations(&[1.0]).is_err());
    }
}
