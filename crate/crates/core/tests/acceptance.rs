//! Acceptance gate. Each test prints one `criterion N PASS|FAIL` line with
//! the measured quantities; run with `--nocapture` to see them.

mod common;

use std::f64::consts::{FRAC_2_PI, PI};
use std::time::{Duration, Instant};

use cca_core::eigen::DEFAULT_TOLERANCE;
use cca_core::estimation::{dominant_separations_with_factor, simulate_records, stats_from_ensemble};
use cca_core::{
    build_grid_geometry, dominant_separations, eigenvalues_symmetric, fit_parameters, molecule_mean_separation,
    molecule_moments, run_ensemble, separation_stats, sweep_sigma, uncoupled_ratio, CouplingGraph, CouplingSet,
    DisorderModel, FitInit, FitOptions, MoleculeParams, SymmetricMatrix,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{linear_fit, small_char_roots};

fn report(n: u32, pass: bool, elapsed: Duration, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n} {verdict} ({:.2} s): {detail}", elapsed.as_secs_f64());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn pair() -> CouplingGraph {
    build_grid_geometry(2, 1, false).unwrap()
}

/// Two-site ensemble whose inter-cavity detuning has spread `sigma_f`.
fn pair_ensemble(j: f64, sigma_f: f64, trials: u64, seed: u64) -> (f64, f64, f64) {
    let per_cavity = MoleculeParams::new(j, sigma_f).unwrap().per_cavity_sigma();
    let e = run_ensemble(
        &pair(),
        &CouplingSet::new(0.0, j, 0.0).unwrap(),
        &DisorderModel::new(per_cavity).unwrap(),
        trials,
        seed,
    )
    .unwrap();
    (e.mean_seps[0], e.std_seps[0], e.std_error_seps()[0])
}

#[test]
fn criterion_1_uncoupled_molecule_mean() {
    let start = Instant::now();
    let expected = FRAC_2_PI.sqrt();
    let quad = molecule_mean_separation(&MoleculeParams::new(0.0, 1.0).unwrap());
    let (mc, _, se) = pair_ensemble(0.0, 1.0, 1_000_000, 1);
    let elapsed = start.elapsed();
    let pass = (quad - expected).abs() <= 1e-7 && (mc - expected).abs() <= 4.0 * se && elapsed.as_secs_f64() < 10.0;
    report(
        1,
        pass,
        elapsed,
        format!(
            "quadrature {quad:.10} vs {expected:.10} (|d| = {:.1e}); MC 1e6 {mc:.6} = {:+.2} SE",
            (quad - expected).abs(),
            (mc - expected) / se
        ),
    );
}

#[test]
fn criterion_2_weak_disorder_asymptote() {
    let start = Instant::now();
    let (mc, _, se) = pair_ensemble(1.0, 0.1, 100_000, 2);
    let elapsed = start.elapsed();
    let target = 2.0 + 0.1f64.powi(2) / 4.0;
    let tol = (3.0 * se).max(1e-3);
    let pass = (mc - target).abs() <= tol && elapsed.as_secs_f64() < 30.0;
    report(
        2,
        pass,
        elapsed,
        format!("MC 1e5 mean {mc:.6} vs {target}, |d| = {:.2e} <= {tol:.2e}", (mc - target).abs()),
    );
}

#[test]
fn criterion_3_disorder_dominated_ratio() {
    let start = Instant::now();
    let closed = (PI / 2.0 - 1.0).sqrt();
    let m = molecule_moments(&MoleculeParams::new(0.0, 1.0).unwrap());
    let analytic = m.std / m.mean;
    let (mean, std, _) = pair_ensemble(0.0, 1.0, 100_000, 3);
    let mc = std / mean;
    let elapsed = start.elapsed();
    let pass = (analytic - closed).abs() <= 1e-6
        && (uncoupled_ratio() - closed).abs() <= 1e-15
        && (mc / closed - 1.0).abs() <= 0.02;
    report(
        3,
        pass,
        elapsed,
        format!(
            "sqrt(pi/2 - 1) = {closed:.10}; quadrature {analytic:.10} (|d| = {:.1e}); MC 1e5 {mc:.5} ({:+.2}%)",
            (analytic - closed).abs(),
            100.0 * (mc / closed - 1.0)
        ),
    );
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> SymmetricMatrix {
    let mut m = SymmetricMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set_symmetric(i, j, rng.random_range(-10.0..10.0));
        }
    }
    m
}

#[test]
fn criterion_4_eigensolver_oracles() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_trace, mut worst_frob, mut worst_root) = (0.0f64, 0.0f64, 0.0f64);
    for case in 0..1000 {
        let n = 1 + case % 16;
        let m = random_symmetric(&mut rng, n);
        let v = eigenvalues_symmetric(&m, DEFAULT_TOLERANCE).unwrap().values;
        worst_trace = worst_trace.max((v.iter().sum::<f64>() - m.trace()).abs());
        worst_frob = worst_frob.max((v.iter().map(|x| x * x).sum::<f64>() - m.frobenius_norm_sq()).abs());
    }
    for case in 0..1000 {
        let m = random_symmetric(&mut rng, 2 + case % 2);
        let v = eigenvalues_symmetric(&m, DEFAULT_TOLERANCE).unwrap().values;
        for (a, b) in v.iter().zip(small_char_roots(&m)) {
            worst_root = worst_root.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_trace <= 1e-9 && worst_frob <= 1e-9 && worst_root <= 1e-8 && elapsed.as_secs_f64() < 10.0;
    report(
        4,
        pass,
        elapsed,
        format!("1000 cases n<=16: max trace err {worst_trace:.1e}, max Frobenius err {worst_frob:.1e}; 1000 2x2/3x3: max root err {worst_root:.1e}"),
    );
}

/// Worst ratio, over modes and weak-disorder rows, of a mean eigenfrequency's
/// distance from its own clean level to its distance from the nearest other
/// clean level. Below 1 means every mode still sits at its clean position.
fn level_drift(clean: &[f64], rows: &[&[f64]]) -> f64 {
    let mut worst = 0.0f64;
    for row in rows {
        for (k, m) in row.iter().enumerate() {
            let own = (m - clean[k]).abs();
            let other = clean
                .iter()
                .filter(|l| (*l - clean[k]).abs() > 1e-9)
                .map(|l| (m - l).abs())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(own / other);
        }
    }
    worst
}

#[test]
fn criterion_5_sweep_shape() {
    let start = Instant::now();
    let couplings = CouplingSet::fdtd_default();
    let grid: Vec<f64> = (0..=20).map(|k| 0.25 * k as f64).collect();
    let mut pass = true;
    let mut details = Vec::new();
    for (rows, cols) in [(2, 2), (3, 3), (4, 4)] {
        let g = build_grid_geometry(rows, cols, false).unwrap();
        let sweep = sweep_sigma(&g, &couplings, &grid, 10_000, 5).unwrap();
        let uncoupled = run_ensemble(&g, &CouplingSet::zero(), &DisorderModel::new(5.0).unwrap(), 10_000, 55).unwrap();

        // (a) mean eigenfrequencies at σ_f <= 0.3 keep their clean order
        let weak: Vec<&[f64]> = sweep.rows.iter().filter(|r| r.sigma_f <= 0.3).map(|r| r.mean_eigs.as_slice()).collect();
        let drift = level_drift(&sweep.rows[0].mean_eigs, &weak);
        // (b) at σ_f = 5 the separations are those of uncoupled cavities
        let strong = sweep.rows[20]
            .mean_seps
            .iter()
            .zip(&uncoupled.mean_seps)
            .map(|(c, u)| (c / u - 1.0).abs())
            .fold(0.0, f64::max);
        // (c) linear growth of every separation for σ_f in [3, 5]
        let tail: Vec<_> = sweep.rows.iter().filter(|r| r.sigma_f >= 3.0).collect();
        let x: Vec<f64> = tail.iter().map(|r| r.sigma_f).collect();
        let min_r2 = (0..rows * cols - 1)
            .map(|k| linear_fit(&x, &tail.iter().map(|r| r.mean_seps[k]).collect::<Vec<_>>()).2)
            .fold(1.0, f64::min);

        pass &= drift < 1.0 && strong <= 0.25 && min_r2 >= 0.99;
        details.push(format!(
            "{} cavities: level drift {drift:.3}, max |sep/uncoupled - 1| {:.1}%, min R2 {min_r2:.4}",
            rows * cols,
            100.0 * strong
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed.as_secs_f64() < 300.0;
    report(5, pass, elapsed, details.join("; "));
}

#[test]
fn criterion_6_table_band() {
    let start = Instant::now();
    let g = build_grid_geometry(2, 2, false).unwrap();
    let couplings = CouplingSet::fdtd_default();
    let clean = sweep_sigma(&g, &couplings, &[0.0], 1, 0).unwrap();
    let mut dominant = dominant_separations(&clean);
    let rule = if dominant.is_empty() {
        // clean gaps (1.2, 0.8, 1.2): no gap reaches twice the median
        dominant = dominant_separations_with_factor(&clean, 1.0);
        "gaps >= median"
    } else {
        "gaps >= 2 x median"
    };
    let mut pass = !dominant.is_empty();
    let mut details = vec![format!("dominant {dominant:?} ({rule})")];
    for sigma in [0.1, 0.2, 0.3] {
        let model = DisorderModel::new(sigma).unwrap();
        let ensemble = stats_from_ensemble(&run_ensemble(&g, &couplings, &model, 10_000, 6).unwrap());
        let sample = separation_stats(&simulate_records(&g, &couplings, &model, 30, 60).unwrap()).unwrap().stats;
        for (label, stats) in [("1e4", &ensemble), ("30", &sample)] {
            for &k in &dominant {
                let s = &stats[k];
                pass &= (1.0..=3.5).contains(&s.mu) && s.ratio <= 0.2;
                details.push(format!("s={sigma} n={label} gap {k}: mu {:.3} ratio {:.3}", s.mu, s.ratio));
            }
        }
    }
    report(6, pass, start.elapsed(), details.join("; "));
}

#[test]
fn criterion_7_round_trip_fit() {
    let start = Instant::now();
    let g = build_grid_geometry(2, 2, false).unwrap();
    let truth = CouplingSet::new(1.2, 0.8, 0.0).unwrap();
    let model = DisorderModel::new(0.15).unwrap();
    let init = FitInit {
        couplings: CouplingSet::new(1.0, 1.0, 0.1).unwrap(),
        sigma_f: 0.1,
    };
    let mut pass = true;
    let mut details = Vec::new();
    for dataset in 0..5u64 {
        let stats = separation_stats(&simulate_records(&g, &truth, &model, 30, 700 + dataset).unwrap()).unwrap().stats;
        let options = FitOptions {
            master_seed: 7000 + dataset,
            ..FitOptions::default()
        };
        let r = fit_parameters(&stats, &g, &init, &options).unwrap();
        let (et, ej) = (r.t / 1.2 - 1.0, r.j1 / 0.8 - 1.0);
        pass &= et.abs() <= 0.1 && ej.abs() <= 0.1;
        details.push(format!(
            "t {:.3} ({:+.1}%) j1 {:.3} ({:+.1}%) [j2 {:.3} s {:.3}]",
            r.t,
            100.0 * et,
            r.j1,
            100.0 * ej,
            r.j2,
            r.sigma_f
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed.as_secs_f64() < 300.0;
    report(7, pass, elapsed, details.join("; "));
}
