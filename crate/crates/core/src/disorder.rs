//! Gaussian fabrication disorder and Monte Carlo ensembles of array spectra.
//!
//! Every trial draws its detunings from its own random stream, a ChaCha8
//! generator seeded from the master seed with the trial index as stream id.
//! Trials are processed in fixed blocks whose partial statistics are merged
//! in block order, so results do not depend on how many threads run them.
//!
//! Detunings are `sigma_f * z` with `z` drawn by `rand_distr::StandardNormal`
//! (ziggurat). Reusing a seed therefore reuses the same unit variates at any
//! `sigma_f`, which keeps stochastic objectives smooth under common random
//! numbers.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::eigen::{eigenvalues_symmetric, EigenSpectrum, DEFAULT_TOLERANCE};
use crate::error::{CcaError, Result};
use crate::format::sig9;
use crate::lattice::{build_hamiltonian, CouplingGraph, CouplingSet, SymmetricMatrix};

pub const DEFAULT_TRIALS: u64 = 10_000;

const BLOCK_TRIALS: u64 = 512;

/// Zero-mean Gaussian disorder of the bare cavity frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderModel {
    sigma_f: f64,
}

impl DisorderModel {
    pub fn new(sigma_f: f64) -> Result<Self> {
        if !sigma_f.is_finite() || sigma_f < 0.0 {
            return Err(CcaError::invalid("sigma_f", format!("must be finite and >= 0, got {sigma_f}")));
        }
        Ok(DisorderModel { sigma_f })
    }

    pub fn sigma_f(&self) -> f64 {
        self.sigma_f
    }
}

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `(master_seed, index)`.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    mix64(mix64(master_seed) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// Random stream of trial `trial` under `master_seed`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

pub fn sample_detunings<R: Rng + ?Sized>(rng: &mut R, n: usize, model: &DisorderModel) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(CcaError::invalid("n", "must be at least 1"));
    }
    Ok((0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            // + 0.0 turns the -0.0 of a zero sigma into +0.0
            model.sigma_f * z + 0.0
        })
        .collect())
}

/// Spectrum of a single disorder realisation: trial `trial` of the ensemble
/// defined by `master_seed`.
pub fn trial_spectrum(
    graph: &CouplingGraph,
    couplings: &CouplingSet,
    model: &DisorderModel,
    master_seed: u64,
    trial: u64,
) -> Result<EigenSpectrum> {
    let clean = build_hamiltonian(graph, couplings, &vec![0.0; graph.num_sites()])?;
    realise(&clean, model, master_seed, trial)
}

fn realise(clean: &SymmetricMatrix, model: &DisorderModel, master_seed: u64, trial: u64) -> Result<EigenSpectrum> {
    let mut rng = trial_rng(master_seed, trial);
    let detunings = sample_detunings(&mut rng, clean.dim(), model)?;
    let mut h = clean.clone();
    for (i, d) in detunings.into_iter().enumerate() {
        h.set_diagonal(i, d);
    }
    eigenvalues_symmetric(&h, DEFAULT_TOLERANCE).map_err(|e| CcaError::TrialFailed {
        trial,
        source: Box::new(e),
    })
}

/// Per-index running mean and sum of squared deviations.
#[derive(Debug, Clone)]
struct Moments {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Moments {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, xs: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((mean, m2), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(xs) {
            let delta = x - *mean;
            *mean += delta / n;
            *m2 += delta * (x - *mean);
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / n;
            self.m2[i] += other.m2[i] + delta * delta * na * nb / n;
        }
        self.count += other.count;
    }

    /// Population standard deviations.
    fn std(&self) -> Vec<f64> {
        let n = self.count as f64;
        self.m2.iter().map(|m2| (m2.max(0.0) / n).sqrt()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub sigma_f: f64,
    pub trials: u64,
    pub mean_eigs: Vec<f64>,
    pub std_eigs: Vec<f64>,
    pub mean_seps: Vec<f64>,
    pub std_seps: Vec<f64>,
    pub seed: u64,
}

impl EnsembleStats {
    pub fn num_modes(&self) -> usize {
        self.mean_eigs.len()
    }

    /// Monte Carlo standard error of each mean separation.
    pub fn std_error_seps(&self) -> Vec<f64> {
        let root = (self.trials as f64).sqrt();
        self.std_seps.iter().map(|s| s / root).collect()
    }
}

/// Averages sorted eigenvalues and adjacent separations over `trials`
/// disorder realisations.
pub fn run_ensemble(
    graph: &CouplingGraph,
    couplings: &CouplingSet,
    model: &DisorderModel,
    trials: u64,
    master_seed: u64,
) -> Result<EnsembleStats> {
    if trials == 0 {
        return Err(CcaError::invalid("trials", "must be at least 1"));
    }
    let n = graph.num_sites();
    let clean = build_hamiltonian(graph, couplings, &vec![0.0; n])?;
    let seps_len = n.saturating_sub(1);

    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let partials: Vec<Result<(Moments, Moments)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut eigs = Moments::new(n);
            let mut seps = Moments::new(seps_len);
            let mut gaps = vec![0.0; seps_len];
            let end = ((b + 1) * BLOCK_TRIALS).min(trials);
            for trial in b * BLOCK_TRIALS..end {
                let spectrum = realise(&clean, model, master_seed, trial)?;
                for (g, w) in gaps.iter_mut().zip(spectrum.values.windows(2)) {
                    *g = w[1] - w[0];
                }
                eigs.push(&spectrum.values);
                seps.push(&gaps);
            }
            Ok((eigs, seps))
        })
        .collect();

    let mut eigs = Moments::new(n);
    let mut seps = Moments::new(seps_len);
    for partial in partials {
        let (e, s) = partial?;
        eigs.merge(&e);
        seps.merge(&s);
    }
    Ok(EnsembleStats {
        sigma_f: model.sigma_f,
        trials,
        std_eigs: eigs.std(),
        mean_eigs: eigs.mean,
        std_seps: seps.std(),
        mean_seps: seps.mean,
        seed: master_seed,
    })
}

/// Ensemble statistics over a grid of disorder strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<EnsembleStats>,
}

pub fn sweep_sigma(
    graph: &CouplingGraph,
    couplings: &CouplingSet,
    sigma_grid: &[f64],
    trials: u64,
    master_seed: u64,
) -> Result<SweepTable> {
    validate_sigma_grid(sigma_grid)?;
    let rows = sigma_grid
        .iter()
        .enumerate()
        .map(|(i, &sigma)| {
            let model = DisorderModel::new(sigma)?;
            run_ensemble(graph, couplings, &model, trials, derive_seed(master_seed, i as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { rows })
}

pub fn validate_sigma_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(CcaError::invalid("sigma_grid", "must contain at least one value"));
    }
    if let Some(bad) = grid.iter().find(|s| !s.is_finite() || **s < 0.0) {
        return Err(CcaError::invalid("sigma_grid", format!("values must be finite and >= 0, got {bad}")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CcaError::invalid("sigma_grid", "values must be strictly increasing"));
    }
    Ok(())
}

impl SweepTable {
    pub fn num_modes(&self) -> usize {
        self.rows.first().map_or(0, |r| r.num_modes())
    }

    pub fn csv_header(&self) -> String {
        let n = self.num_modes();
        let mut cols = vec!["sigma_f".to_string(), "trials".to_string()];
        cols.extend((1..=n).map(|k| format!("mean_eig_{k}")));
        cols.extend((1..=n).map(|k| format!("std_eig_{k}")));
        cols.extend((1..n).map(|k| format!("mean_sep_{k}")));
        cols.extend((1..n).map(|k| format!("std_sep_{k}")));
        cols.join(",")
    }

    /// One CSV row per grid point, frequencies to nine significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for row in &self.rows {
            let mut fields = vec![sig9(row.sigma_f), row.trials.to_string()];
            for series in [&row.mean_eigs, &row.std_eigs, &row.mean_seps, &row.std_seps] {
                fields.extend(series.iter().map(|&v| sig9(v)));
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Long-format `sigma_f,series,value` rows for external plotting.
    pub fn to_plot_csv(&self) -> String {
        let mut out = String::from("sigma_f,series,value\n");
        for row in &self.rows {
            let sigma = sig9(row.sigma_f);
            let series: [(&str, &Vec<f64>); 4] = [
                ("mean_eig", &row.mean_eigs),
                ("std_eig", &row.std_eigs),
                ("mean_sep", &row.mean_seps),
                ("std_sep", &row.std_seps),
            ];
            for (name, values) in series {
                for (k, v) in values.iter().enumerate() {
                    out.push_str(&format!("{sigma},{name}_{},{}\n", k + 1, sig9(*v)));
                }
            }
        }
        out
    }
}
