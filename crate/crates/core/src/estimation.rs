//! Separation statistics of measured spectra, regime classification, and
//! inversion of the ensemble model for couplings and disorder.
//!
//! Statistics are taken over adjacent-mode separations rather than absolute
//! mode frequencies, so a common frequency offset of an array (chip-scale
//! fabrication drift) drops out.

use std::collections::HashMap;
use std::io::Read;

use crate::disorder::{run_ensemble, trial_spectrum, DisorderModel, EnsembleStats, SweepTable};
use crate::error::{CcaError, Result};
use crate::format::sig9;
use crate::lattice::{CouplingGraph, CouplingSet};
use crate::molecule::uncoupled_ratio;
use crate::simplex::{minimize, SimplexOptions};

/// Speed of light in nm·THz, for `f = c / λ`.
pub const SPEED_OF_LIGHT_NM_THZ: f64 = 299_792.458;

pub const SPECTRA_HEADER: &str = "array_id,array_size,mode_index,frequency_THz";
pub const STATS_HEADER: &str = "gap_index,mu_THz,sigma_THz,ratio,count";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Thz,
    Nm,
}

impl Units {
    fn to_thz(self, value: f64) -> f64 {
        match self {
            Units::Thz => value,
            Units::Nm => SPEED_OF_LIGHT_NM_THZ / value,
        }
    }
}

impl std::str::FromStr for Units {
    type Err = CcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "thz" => Ok(Units::Thz),
            "nm" => Ok(Units::Nm),
            other => Err(CcaError::invalid("units", format!("expected THz or nm, got `{other}`"))),
        }
    }
}

/// Mode frequencies of one fabricated (or simulated) array, ascending, THz.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord {
    pub array_id: String,
    pub array_size: usize,
    pub mode_frequencies: Vec<f64>,
}

impl SpectrumRecord {
    pub fn new(array_id: impl Into<String>, array_size: usize, mut mode_frequencies: Vec<f64>) -> Self {
        mode_frequencies.sort_by(f64::total_cmp);
        SpectrumRecord {
            array_id: array_id.into(),
            array_size,
            mode_frequencies,
        }
    }

    /// One mode per cavity.
    pub fn is_complete(&self) -> bool {
        self.mode_frequencies.len() == self.array_size
    }
}

/// Reads `array_id,array_size,mode_index,frequency_THz` rows. Lines starting
/// with `#` are ignored. Records keep first-appearance order; modes are
/// sorted by frequency after unit conversion.
pub fn read_spectra_csv<R: Read>(input: R, units: Units) -> Result<Vec<SpectrumRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != SPECTRA_HEADER {
        return Err(CcaError::Parse(format!("expected header `{SPECTRA_HEADER}`, got `{}`", header.join(","))));
    }

    let mut order: Vec<String> = Vec::new();
    let mut by_id: HashMap<String, (usize, Vec<f64>)> = HashMap::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let id = field(0).to_string();
        let size: usize = field(1)
            .parse()
            .map_err(|_| CcaError::Parse(format!("row {}: bad array_size `{}`", line + 1, field(1))))?;
        field(2)
            .parse::<usize>()
            .map_err(|_| CcaError::Parse(format!("row {}: bad mode_index `{}`", line + 1, field(2))))?;
        let raw: f64 = field(3)
            .parse()
            .map_err(|_| CcaError::Parse(format!("row {}: bad frequency `{}`", line + 1, field(3))))?;
        let freq = units.to_thz(raw);
        if !freq.is_finite() || (units == Units::Nm && raw <= 0.0) {
            return Err(CcaError::Parse(format!("row {}: non-physical value `{raw}`", line + 1)));
        }
        match by_id.get_mut(&id) {
            Some((s, freqs)) => {
                if *s != size {
                    return Err(CcaError::Parse(format!("array `{id}` declared with sizes {s} and {size}")));
                }
                freqs.push(freq);
            }
            None => {
                order.push(id.clone());
                by_id.insert(id, (size, vec![freq]));
            }
        }
    }
    Ok(order
        .into_iter()
        .map(|id| {
            let (size, freqs) = by_id.remove(&id).expect("id recorded");
            SpectrumRecord::new(id, size, freqs)
        })
        .collect())
}

pub fn write_spectra_csv(records: &[SpectrumRecord]) -> String {
    let mut out = format!("{SPECTRA_HEADER}\n");
    for r in records {
        for (k, f) in r.mode_frequencies.iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", r.array_id, r.array_size, k, sig9(*f)));
        }
    }
    out
}

/// Spectra of `count` simulated arrays: record `k` is trial `k` of the
/// ensemble with the same parameters and seed.
pub fn simulate_records(
    graph: &CouplingGraph,
    couplings: &CouplingSet,
    model: &DisorderModel,
    count: usize,
    master_seed: u64,
) -> Result<Vec<SpectrumRecord>> {
    (0..count)
        .map(|k| {
            let spectrum = trial_spectrum(graph, couplings, model, master_seed, k as u64)?;
            Ok(SpectrumRecord::new(format!("sim{k}"), graph.num_sites(), spectrum.values))
        })
        .collect()
}

/// Statistics of one adjacent-mode gap across arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationStats {
    /// Zero-based gap index: gap `k` separates modes `k` and `k + 1`.
    pub index: usize,
    pub mu: f64,
    /// Population standard deviation (divisor N).
    pub sigma: f64,
    pub ratio: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub array_size: usize,
    pub stats: Vec<SeparationStats>,
    /// Arrays whose mode count differs from their cavity count.
    pub excluded: Vec<String>,
}

fn ratio(mu: f64, sigma: f64) -> f64 {
    if mu > 0.0 {
        sigma / mu
    } else if sigma == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn separation_stats(records: &[SpectrumRecord]) -> Result<SeparationReport> {
    let first = records.first().ok_or_else(|| CcaError::InsufficientData("no spectra supplied".into()))?;
    let size = first.array_size;
    if let Some(other) = records.iter().find(|r| r.array_size != size) {
        return Err(CcaError::invalid(
            "array_size",
            format!("mixed array sizes {size} and {} (array `{}`)", other.array_size, other.array_id),
        ));
    }
    let (valid, invalid): (Vec<_>, Vec<_>) = records.iter().partition(|r| r.is_complete());
    let excluded = invalid.into_iter().map(|r| r.array_id.clone()).collect();
    if valid.len() < 2 {
        return Err(CcaError::InsufficientData(format!(
            "need at least 2 complete spectra of size {size}, got {}",
            valid.len()
        )));
    }
    if size < 2 {
        return Err(CcaError::InsufficientData("arrays with one mode have no separations".into()));
    }

    let stats = (0..size - 1)
        .map(|k| {
            let mut gaps: Vec<f64> = valid
                .iter()
                .map(|r| r.mode_frequencies[k + 1] - r.mode_frequencies[k])
                .collect();
            // summing in sorted order makes the result independent of record order
            gaps.sort_by(f64::total_cmp);
            let n = gaps.len() as f64;
            let mu = gaps.iter().sum::<f64>() / n;
            let sigma = (gaps.iter().map(|g| (g - mu).powi(2)).sum::<f64>() / n).sqrt();
            SeparationStats {
                index: k,
                mu,
                sigma,
                ratio: ratio(mu, sigma),
                count: gaps.len(),
            }
        })
        .collect();
    Ok(SeparationReport {
        array_size: size,
        stats,
        excluded,
    })
}

/// Separation statistics implied by an ensemble run, in the same form as
/// measured ones.
pub fn stats_from_ensemble(e: &EnsembleStats) -> Vec<SeparationStats> {
    e.mean_seps
        .iter()
        .zip(&e.std_seps)
        .enumerate()
        .map(|(index, (&mu, &sigma))| SeparationStats {
            index,
            mu,
            sigma,
            ratio: ratio(mu, sigma),
            count: e.trials as usize,
        })
        .collect()
}

pub fn write_stats_csv(stats: &[SeparationStats]) -> String {
    let mut out = format!("{STATS_HEADER}\n");
    for s in stats {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.index,
            sig9(s.mu),
            sig9(s.sigma),
            sig9(s.ratio),
            s.count
        ));
    }
    out
}

pub fn read_stats_csv<R: Read>(input: R) -> Result<Vec<SeparationStats>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != STATS_HEADER {
        return Err(CcaError::Parse(format!("expected header `{STATS_HEADER}`, got `{}`", header.join(","))));
    }
    let mut stats = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let bad = |what: &str| CcaError::Parse(format!("row {}: bad {what}", line + 1));
        let num = |i: usize, what: &str| -> Result<f64> { row.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| bad(what)) };
        let index = row.get(0).and_then(|v| v.parse().ok()).ok_or_else(|| bad("gap_index"))?;
        let count = row.get(4).and_then(|v| v.parse().ok()).ok_or_else(|| bad("count"))?;
        let (mu, sigma) = (num(1, "mu_THz")?, num(2, "sigma_THz")?);
        stats.push(SeparationStats {
            index,
            mu,
            sigma,
            ratio: ratio(mu, sigma),
            count,
        });
    }
    Ok(stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    CouplingDominated,
    DisorderDominated,
    Ambiguous,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::CouplingDominated => "coupling-dominated",
            Regime::DisorderDominated => "disorder-dominated",
            Regime::Ambiguous => "ambiguous",
        })
    }
}

pub const DEFAULT_REGIME_THRESHOLD: f64 = 0.3;

/// Half-width of the disorder band around `√(π/2 − 1)`, relative.
const DISORDER_BAND: f64 = 0.2;

pub fn classify_ratio(ratio: f64, threshold: f64) -> Regime {
    let reference = uncoupled_ratio();
    if ratio < threshold {
        Regime::CouplingDominated
    } else if (ratio - reference).abs() <= DISORDER_BAND * reference {
        Regime::DisorderDominated
    } else {
        Regime::Ambiguous
    }
}

/// Labels each gap by its σ/μ: below `threshold` the coupling dominates, near
/// the half-normal ratio the disorder does.
pub fn regime_classify(stats: &[SeparationStats], threshold: f64) -> Result<Vec<(usize, Regime)>> {
    if !(threshold > 0.0 && threshold < uncoupled_ratio()) {
        return Err(CcaError::invalid(
            "threshold",
            format!("must lie in (0, {:.6}), got {threshold}", uncoupled_ratio()),
        ));
    }
    Ok(stats.iter().map(|s| (s.index, classify_ratio(s.ratio, threshold))).collect())
}

pub const DOMINANT_FACTOR: f64 = 2.0;

/// Gaps of the least-disordered sweep row that are at least twice the
/// median gap, largest first. A lone gap (the molecule) is always dominant.
pub fn dominant_separations(sweep: &SweepTable) -> Vec<usize> {
    dominant_separations_with_factor(sweep, DOMINANT_FACTOR)
}

pub fn dominant_separations_with_factor(sweep: &SweepTable, factor: f64) -> Vec<usize> {
    let Some(row) = sweep.rows.iter().min_by(|a, b| a.sigma_f.total_cmp(&b.sigma_f)) else {
        return Vec::new();
    };
    dominant_gaps(&row.mean_seps, factor)
}

pub fn dominant_gaps(gaps: &[f64], factor: f64) -> Vec<usize> {
    match gaps {
        [] => return Vec::new(),
        [only] => return if *only > 0.0 { vec![0] } else { Vec::new() },
        _ => {}
    }
    let mut sorted = gaps.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len().is_multiple_of(2) {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    };
    let mut picked: Vec<usize> = (0..gaps.len())
        .filter(|&k| gaps[k] > 0.0 && gaps[k] >= factor * median)
        .collect();
    picked.sort_by(|&a, &b| gaps[b].total_cmp(&gaps[a]).then(a.cmp(&b)));
    picked
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitInit {
    pub couplings: CouplingSet,
    pub sigma_f: f64,
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Trials per objective evaluation during the search.
    pub search_trials: u64,
    /// Trials for the reported objective at the optimum.
    pub final_trials: u64,
    /// Shared by every evaluation (common random numbers).
    pub master_seed: u64,
    /// When false, `j2` stays at its initial value.
    pub fit_j2: bool,
    pub simplex: SimplexOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            search_trials: 2000,
            final_trials: 10_000,
            master_seed: 0,
            fit_j2: true,
            simplex: SimplexOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapResidual {
    pub index: usize,
    pub mu_obs: f64,
    pub mu_sim: f64,
    pub sigma_obs: f64,
    pub sigma_sim: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub t: f64,
    pub j1: f64,
    pub j2: f64,
    pub sigma_f: f64,
    /// Σ (μ_sim − μ_obs)² + (σ_sim − σ_obs)², THz².
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Parameters whose search optimum was negative and was clamped to 0.
    pub clamped: Vec<&'static str>,
    pub residuals: Vec<GapResidual>,
}

impl FitResult {
    pub fn couplings(&self) -> CouplingSet {
        CouplingSet {
            t: self.t,
            j1: self.j1,
            j2: self.j2,
        }
    }
}

struct ParamLayout {
    names: Vec<&'static str>,
    fixed_j2: Option<f64>,
}

impl ParamLayout {
    fn new(fit_j2: bool, j2: f64) -> Self {
        if fit_j2 {
            ParamLayout {
                names: vec!["t", "j1", "j2", "sigma_f"],
                fixed_j2: None,
            }
        } else {
            ParamLayout {
                names: vec!["t", "j1", "sigma_f"],
                fixed_j2: Some(j2),
            }
        }
    }

    fn pack(&self, init: &FitInit) -> Vec<f64> {
        let c = init.couplings;
        match self.fixed_j2 {
            None => vec![c.t, c.j1, c.j2, init.sigma_f],
            Some(_) => vec![c.t, c.j1, init.sigma_f],
        }
    }

    fn unpack(&self, x: &[f64]) -> (CouplingSet, f64) {
        let x: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
        match self.fixed_j2 {
            None => (CouplingSet { t: x[0], j1: x[1], j2: x[2] }, x[3]),
            Some(j2) => (CouplingSet { t: x[0], j1: x[1], j2 }, x[2]),
        }
    }
}

/// THz² of objective per THz of negative parameter.
const NEGATIVE_PENALTY: f64 = 1.0;

fn misfit(observed: &[SeparationStats], sim: &EnsembleStats) -> f64 {
    observed
        .iter()
        .map(|o| (sim.mean_seps[o.index] - o.mu).powi(2) + (sim.std_seps[o.index] - o.sigma).powi(2))
        .sum()
}

/// Least-squares fit of `(t, j1, j2, σ_f)` to observed gap statistics by
/// simplex search over the Monte Carlo forward model.
///
/// Every evaluation reuses `master_seed`, so the objective is a
/// deterministic, smooth function of the parameters. Negative trial values
/// are evaluated at 0 plus a linear penalty on their magnitude, so the search
/// is pushed back towards the feasible region instead of drifting on a flat
/// plateau; a negative optimum is clamped and reported.
pub fn fit_parameters(
    stats: &[SeparationStats],
    graph: &CouplingGraph,
    init: &FitInit,
    options: &FitOptions,
) -> Result<FitResult> {
    if stats.is_empty() {
        return Err(CcaError::InsufficientData("no separation statistics to fit".into()));
    }
    let gaps = graph.num_sites().saturating_sub(1);
    for s in stats {
        if s.index >= gaps {
            return Err(CcaError::invalid(
                "gap_index",
                format!("gap {} does not exist in a {}-cavity array", s.index, graph.num_sites()),
            ));
        }
        if !(s.mu.is_finite() && s.sigma.is_finite()) {
            return Err(CcaError::invalid("stats", format!("gap {} has non-finite statistics", s.index)));
        }
    }
    if options.search_trials < 1000 {
        return Err(CcaError::invalid("trials", format!("fit needs at least 1000 trials, got {}", options.search_trials)));
    }
    CouplingSet::new(init.couplings.t, init.couplings.j1, init.couplings.j2)?;
    DisorderModel::new(init.sigma_f)?;

    let layout = ParamLayout::new(options.fit_j2, init.couplings.j2);
    let start = layout.pack(init);
    let steps: Vec<f64> = start.iter().map(|v| (0.1 * v.abs()).max(0.05)).collect();

    let simulate = |x: &[f64], trials: u64| -> Result<EnsembleStats> {
        let (couplings, sigma) = layout.unpack(x);
        run_ensemble(graph, &couplings, &DisorderModel::new(sigma)?, trials, options.master_seed)
    };
    let penalty = |x: &[f64]| -> f64 { NEGATIVE_PENALTY * x.iter().map(|v| (-v).max(0.0)).sum::<f64>() };
    let search = minimize(
        |x| Ok(misfit(stats, &simulate(x, options.search_trials)?) + penalty(x)),
        &start,
        &steps,
        &options.simplex,
    )?;

    let clamped = layout
        .names
        .iter()
        .zip(&search.best)
        .filter(|(_, v)| **v < 0.0)
        .map(|(name, _)| *name)
        .collect();
    let (couplings, sigma_f) = layout.unpack(&search.best);
    let final_run = simulate(&search.best, options.final_trials.max(options.search_trials))?;
    let objective = misfit(stats, &final_run);
    if !objective.is_finite() {
        return Err(CcaError::NonFiniteObjective(search.best));
    }
    let residuals = stats
        .iter()
        .map(|o| GapResidual {
            index: o.index,
            mu_obs: o.mu,
            mu_sim: final_run.mean_seps[o.index],
            sigma_obs: o.sigma,
            sigma_sim: final_run.std_seps[o.index],
        })
        .collect();
    Ok(FitResult {
        t: couplings.t,
        j1: couplings.j1,
        j2: couplings.j2,
        sigma_f,
        objective,
        iterations: search.iterations,
        converged: search.converged,
        clamped,
        residuals,
    })
}
