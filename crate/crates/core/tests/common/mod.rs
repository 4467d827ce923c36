//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use cca_core::SymmetricMatrix;

/// Bisection for a sign change of `p` on `[a, b]`.
pub fn bisect(p: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut pa = p(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let pm = p(m);
        if pm == 0.0 {
            return m;
        }
        if (pm < 0.0) == (pa < 0.0) {
            a = m;
            pa = pm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn gershgorin(m: &SymmetricMatrix) -> (f64, f64) {
    let n = m.dim();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| m.get(i, j).abs()).sum();
        lo = lo.min(m.get(i, i) - radius);
        hi = hi.max(m.get(i, i) + radius);
    }
    (lo - 1.0, hi + 1.0)
}

/// Roots of the characteristic polynomial of a 2×2 or 3×3 symmetric matrix,
/// ascending. The critical points of the polynomial bracket each root.
pub fn small_char_roots(m: &SymmetricMatrix) -> Vec<f64> {
    let (lo, hi) = gershgorin(m);
    match m.dim() {
        2 => {
            let (a, b, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 1));
            let p = |x: f64| (a - x) * (d - x) - b * b;
            let mid = 0.5 * (a + d);
            vec![bisect(p, lo, mid), bisect(p, mid, hi)]
        }
        3 => {
            let g = |i, j| m.get(i, j);
            let tr = g(0, 0) + g(1, 1) + g(2, 2);
            let c1 = g(0, 0) * g(1, 1) + g(0, 0) * g(2, 2) + g(1, 1) * g(2, 2)
                - g(0, 1) * g(0, 1)
                - g(0, 2) * g(0, 2)
                - g(1, 2) * g(1, 2);
            let det = determinant(m, 0.0);
            // p(x) = det(A - xI) = -x³ + tr x² - c1 x + det
            let p = |x: f64| ((-x + tr) * x - c1) * x + det;
            // p'(x) = -3x² + 2 tr x - c1; real roots since A is symmetric
            let disc = (tr * tr - 3.0 * c1).max(0.0).sqrt();
            let (r1, r2) = ((tr - disc) / 3.0, (tr + disc) / 3.0);
            vec![bisect(p, lo, r1), bisect(p, r1, r2), bisect(p, r2, hi)]
        }
        n => panic!("closed-form bracketing only for n = 2, 3, got {n}"),
    }
}

/// `det(A − xI)` by Gaussian elimination with partial pivoting.
pub fn determinant(m: &SymmetricMatrix, x: f64) -> f64 {
    let n = m.dim();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m.get(i, j) - if i == j { x } else { 0.0 }).collect())
        .collect();
    let mut det = 1.0;
    for k in 0..n {
        let pivot = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        if a[pivot][k] == 0.0 {
            return 0.0;
        }
        if pivot != k {
            a.swap(pivot, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            let (upper, lower) = a.split_at_mut(i);
            for (x, y) in lower[0][k..].iter_mut().zip(&upper[k][k..]) {
                *x -= f * y;
            }
        }
    }
    det
}

/// Characteristic roots located by sign changes on a dense grid and refined
/// by bisection. Suitable for well-separated spectra only.
pub fn grid_char_roots(m: &SymmetricMatrix, points: usize) -> Vec<f64> {
    let (lo, hi) = gershgorin(m);
    let p = |x: f64| determinant(m, x);
    let step = (hi - lo) / points as f64;
    let mut roots = Vec::new();
    let mut prev = p(lo);
    for k in 1..=points {
        let x = lo + step * k as f64;
        let cur = p(x);
        if cur == 0.0 {
            roots.push(x);
        } else if prev != 0.0 && (cur < 0.0) != (prev < 0.0) {
            roots.push(bisect(p, x - step, x));
        }
        prev = cur;
    }
    roots
}

/// Least-squares slope, intercept and coefficient of determination.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (slope, intercept, 1.0 - ss_res / ss_tot)
}

/// Brute-force sample mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
