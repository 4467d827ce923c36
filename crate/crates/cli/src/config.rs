//! Flag / config-file resolution and the metadata header written into every
//! output file.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use cca_core::{build_grid_geometry, disorder::validate_sigma_grid, CouplingGraph, CouplingSet, Units};
use clap::ValueEnum;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandKind {
    Sweep,
    Ensemble,
    Molecule,
    Analyze,
    Fit,
    Simulate,
}

impl CommandKind {
    fn name(self) -> &'static str {
        match self {
            CommandKind::Sweep => "sweep",
            CommandKind::Ensemble => "ensemble",
            CommandKind::Molecule => "molecule",
            CommandKind::Analyze => "analyze",
            CommandKind::Fit => "fit",
            CommandKind::Simulate => "simulate",
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to `--config`,
/// then to the built-in defaults.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// TOML file with any of the keys below (underscored names)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Couple along both grid diagonals instead of only (r,c)-(r+1,c+1)
    #[arg(long)]
    pub both_diagonals: bool,
    /// 60° diagonal coupling, THz
    #[arg(long)]
    pub t: Option<f64>,
    /// Vertical coupling, THz
    #[arg(long)]
    pub j1: Option<f64>,
    /// Horizontal coupling, THz
    #[arg(long)]
    pub j2: Option<f64>,
    /// Disorder standard deviation, THz
    #[arg(long)]
    pub sigma_f: Option<f64>,
    /// start:stop:step or a comma-separated list, THz
    #[arg(long)]
    pub sigma_grid: Option<String>,
    /// Coupling grid for `molecule`, start:stop:step or list, THz
    #[arg(long)]
    pub j_grid: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Trials for the final objective reported by `fit`
    #[arg(long)]
    pub final_trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads (0 = all cores); never changes results
    #[arg(long)]
    pub threads: Option<usize>,
    /// Units of the input frequency column: THz or nm
    #[arg(long)]
    pub units: Option<String>,
    /// σ/μ below which a gap counts as coupling-dominated
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Keep j2 at its initial value during `fit`
    #[arg(long)]
    pub freeze_j2: bool,
    /// Number of arrays written by `simulate`
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    rows: Option<usize>,
    cols: Option<usize>,
    both_diagonals: Option<bool>,
    t: Option<f64>,
    j1: Option<f64>,
    j2: Option<f64>,
    sigma_f: Option<f64>,
    sigma_grid: Option<String>,
    j_grid: Option<String>,
    trials: Option<u64>,
    final_trials: Option<u64>,
    seed: Option<u64>,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    threads: Option<usize>,
    units: Option<String>,
    threshold: Option<f64>,
    freeze_j2: Option<bool>,
    count: Option<usize>,
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub rows: usize,
    pub cols: usize,
    pub both_diagonals: bool,
    pub couplings: CouplingSet,
    pub sigma_f: f64,
    pub sigma_grid_spec: String,
    pub sigma_grid: Vec<f64>,
    pub j_grid_spec: String,
    pub j_grid: Vec<f64>,
    pub trials: u64,
    pub final_trials: u64,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub threads: usize,
    pub units: Units,
    pub threshold: f64,
    pub fit_j2: bool,
    pub count: usize,
    pub graph: CouplingGraph,
}

pub fn parse_grid(field: &'static str, spec: &str) -> Result<Vec<f64>> {
    let bad = |why: String| anyhow!("invalid `{field}`: {why}");
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("`{s}` is not a number")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step.is_nan() || step <= 0.0 || start.is_nan() || stop.is_nan() || stop < start {
                return Err(bad(format!("expected start:stop:step with step > 0 and stop >= start, got `{spec}`")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + i as f64 * step).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(bad(format!("expected start:stop:step or a comma-separated list, got `{spec}`"))),
    };
    validate_sigma_grid(&grid).map_err(|e| bad(e.to_string().replace("invalid `sigma_grid`: ", "")))?;
    Ok(grid)
}

fn positive<T: PartialOrd + Default + std::fmt::Display>(field: &str, v: T) -> Result<T> {
    if v > T::default() {
        Ok(v)
    } else {
        bail!("invalid `{field}`: must be at least 1, got {v}")
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        bail!("invalid `{field}`: must be finite and >= 0, got {v}")
    }
}

impl RunConfig {
    pub fn resolve(command: CommandKind, flags: &Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
                toml::from_str::<FileConfig>(&text).with_context(|| format!("parsing config {}", path.display()))?
            }
            None => FileConfig::default(),
        };
        let defaults = CouplingSet::fdtd_default();

        let rows = positive("rows", flags.rows.or(file.rows).unwrap_or(2))?;
        let cols = positive("cols", flags.cols.or(file.cols).unwrap_or(2))?;
        let both_diagonals = flags.both_diagonals || file.both_diagonals.unwrap_or(false);
        let t = non_negative("t", flags.t.or(file.t).unwrap_or(defaults.t))?;
        let j1 = non_negative("j1", flags.j1.or(file.j1).unwrap_or(defaults.j1))?;
        let j2 = non_negative("j2", flags.j2.or(file.j2).unwrap_or(defaults.j2))?;
        let sigma_f = non_negative("sigma_f", flags.sigma_f.or(file.sigma_f).unwrap_or(0.15))?;
        let sigma_grid_spec = flags
            .sigma_grid
            .clone()
            .or(file.sigma_grid)
            .unwrap_or_else(|| "0:5:0.25".to_string());
        let sigma_grid = parse_grid("sigma_grid", &sigma_grid_spec)?;
        let j_grid_spec = flags.j_grid.clone().or(file.j_grid).unwrap_or_else(|| "0:2:0.5".to_string());
        let j_grid = parse_grid("j_grid", &j_grid_spec)?;
        let default_trials = if command == CommandKind::Fit { 2000 } else { cca_core::DEFAULT_TRIALS };
        let trials = positive("trials", flags.trials.or(file.trials).unwrap_or(default_trials))?;
        if command == CommandKind::Fit && trials < 1000 {
            bail!("invalid `trials`: fit needs at least 1000 trials per evaluation, got {trials}");
        }
        let final_trials = positive(
            "final_trials",
            flags.final_trials.or(file.final_trials).unwrap_or(cca_core::DEFAULT_TRIALS),
        )?;
        let seed = flags.seed.or(file.seed).unwrap_or(0);
        let input = flags.input.clone().or(file.input);
        let output = flags.output.clone().or(file.output);
        let threads = flags.threads.or(file.threads).unwrap_or(0);
        let units: Units = flags
            .units
            .clone()
            .or(file.units)
            .unwrap_or_else(|| "THz".to_string())
            .parse()
            .map_err(|e: cca_core::CcaError| anyhow!("{e}"))?;
        let threshold = flags
            .threshold
            .or(file.threshold)
            .unwrap_or(cca_core::estimation::DEFAULT_REGIME_THRESHOLD);
        if !(threshold > 0.0 && threshold < cca_core::uncoupled_ratio()) {
            bail!("invalid `threshold`: must lie in (0, {:.6}), got {threshold}", cca_core::uncoupled_ratio());
        }
        let fit_j2 = !(flags.freeze_j2 || file.freeze_j2.unwrap_or(false));
        let count = positive("count", flags.count.or(file.count).unwrap_or(30))?;

        if matches!(command, CommandKind::Analyze | CommandKind::Fit) && input.is_none() {
            bail!("invalid `input`: the {} command needs --input", command.name());
        }
        let graph = build_grid_geometry(rows, cols, both_diagonals)?;
        if matches!(command, CommandKind::Sweep | CommandKind::Ensemble | CommandKind::Fit | CommandKind::Simulate)
            && graph.num_sites() < 2
        {
            bail!("invalid `rows`: a {rows}x{cols} array has no mode separations; need at least 2 cavities");
        }

        Ok(RunConfig {
            command,
            rows,
            cols,
            both_diagonals,
            couplings: CouplingSet::new(t, j1, j2)?,
            sigma_f,
            sigma_grid_spec,
            sigma_grid,
            j_grid_spec,
            j_grid,
            trials,
            final_trials,
            seed,
            input,
            output,
            threads,
            units,
            threshold,
            fit_j2,
            count,
            graph,
        })
    }

    /// Commented header naming every resolved setting that can influence the
    /// output. Thread count and output path are left out: they never change
    /// the numbers, and keeping them out keeps reruns byte-identical.
    pub fn metadata(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_deref().map_or("-".to_string(), |p: &Path| p.display().to_string());
        let c = &self.couplings;
        let lines = [
            format!("cca {}", env!("CARGO_PKG_VERSION")),
            format!("command = {}", self.command.name()),
            format!("rows = {}", self.rows),
            format!("cols = {}", self.cols),
            format!("both_diagonals = {}", self.both_diagonals),
            format!("t = {}", c.t),
            format!("j1 = {}", c.j1),
            format!("j2 = {}", c.j2),
            format!("sigma_f = {}", self.sigma_f),
            format!("sigma_grid = {}", self.sigma_grid_spec),
            format!("j_grid = {}", self.j_grid_spec),
            format!("trials = {}", self.trials),
            format!("final_trials = {}", self.final_trials),
            format!("seed = {}", self.seed),
            format!("input = {}", path(&self.input)),
            format!("units = {}", match self.units {
                Units::Thz => "THz",
                Units::Nm => "nm",
            }),
            format!("threshold = {}", self.threshold),
            format!("fit_j2 = {}", self.fit_j2),
            format!("count = {}", self.count),
            "frequencies in THz (g/2pi convention)".to_string(),
        ];
        lines.iter().map(|l| format!("# {l}\n")).collect()
    }
}
