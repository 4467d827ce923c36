use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cca_core::estimation::{
    read_spectra_csv, read_stats_csv, simulate_records, write_spectra_csv, write_stats_csv, SPECTRA_HEADER,
    STATS_HEADER,
};
use cca_core::format::sig9;
use cca_core::molecule::{strong_coupling_mean, strong_coupling_std, uncoupled_mean, uncoupled_std};
use cca_core::{
    fit_parameters, molecule_moments, regime_classify, run_ensemble, separation_stats, sweep_sigma, DisorderModel,
    FitInit, FitOptions, MoleculeParams, SeparationStats, SweepTable,
};

use crate::config::{CommandKind, RunConfig};

/// A file to be written once every computation has succeeded.
pub struct Artifact {
    pub path: Option<PathBuf>,
    pub contents: String,
}

/// Everything a command produces: files plus a human-readable summary.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: String,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        CommandKind::Sweep => sweep(cfg),
        CommandKind::Ensemble => ensemble(cfg),
        CommandKind::Molecule => molecule(cfg),
        CommandKind::Analyze => analyze(cfg),
        CommandKind::Fit => fit(cfg),
        CommandKind::Simulate => simulate(cfg),
    }
}

/// `out.csv` → `out.<suffix>.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}.{suffix}.{ext}"))
}

fn with_metadata(cfg: &RunConfig, extra: &[String], body: &str) -> String {
    let mut out = cfg.metadata();
    for line in extra {
        out.push_str(&format!("# {line}\n"));
    }
    out.push_str(body);
    out
}

fn sweep_outcome(cfg: &RunConfig, table: &SweepTable) -> Outcome {
    let mut artifacts = vec![Artifact {
        path: cfg.output.clone(),
        contents: with_metadata(cfg, &[], &table.to_csv()),
    }];
    if let Some(out) = &cfg.output {
        artifacts.push(Artifact {
            path: Some(sibling(out, "plot")),
            contents: with_metadata(cfg, &[], &table.to_plot_csv()),
        });
    }
    let summary = format!(
        "{} grid point(s), {} cavities, {} trials each",
        table.rows.len(),
        cfg.graph.num_sites(),
        cfg.trials
    );
    Outcome { artifacts, summary }
}

fn sweep(cfg: &RunConfig) -> Result<Outcome> {
    let table = sweep_sigma(&cfg.graph, &cfg.couplings, &cfg.sigma_grid, cfg.trials, cfg.seed)?;
    Ok(sweep_outcome(cfg, &table))
}

fn ensemble(cfg: &RunConfig) -> Result<Outcome> {
    let stats = run_ensemble(
        &cfg.graph,
        &cfg.couplings,
        &DisorderModel::new(cfg.sigma_f)?,
        cfg.trials,
        cfg.seed,
    )?;
    Ok(sweep_outcome(cfg, &SweepTable { rows: vec![stats] }))
}

fn molecule(cfg: &RunConfig) -> Result<Outcome> {
    let mut body =
        String::from("j,sigma_f,mu,sigma,ratio,mu_strong_coupling,sigma_strong_coupling,mu_uncoupled,sigma_uncoupled\n");
    for &j in &cfg.j_grid {
        for &s in &cfg.sigma_grid {
            let p = MoleculeParams::new(j, s)?;
            let m = molecule_moments(&p);
            let ratio = if m.mean > 0.0 { m.std / m.mean } else { 0.0 };
            let fields = [
                j,
                s,
                m.mean,
                m.std,
                ratio,
                strong_coupling_mean(&p),
                strong_coupling_std(&p),
                uncoupled_mean(&p),
                uncoupled_std(&p),
            ];
            body.push_str(&fields.map(sig9).join(","));
            body.push('\n');
        }
    }
    let note = ["sigma_f = standard deviation of the bare detuning between the two cavities".to_string()];
    Ok(Outcome {
        artifacts: vec![Artifact {
            path: cfg.output.clone(),
            contents: with_metadata(cfg, &note, &body),
        }],
        summary: format!("{} x {} (j, sigma_f) grid", cfg.j_grid.len(), cfg.sigma_grid.len()),
    })
}

fn read_input(cfg: &RunConfig) -> Result<String> {
    let path = cfg.input.as_ref().expect("validated");
    let text = fs::read_to_string(path).with_context(|| format!("reading input {}", path.display()))?;
    if text.lines().all(|l| l.trim().is_empty() || l.trim_start().starts_with('#')) {
        bail!("input {} is empty", path.display());
    }
    Ok(text)
}

fn first_data_line(text: &str) -> &str {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("")
}

fn analyze(cfg: &RunConfig) -> Result<Outcome> {
    let text = read_input(cfg)?;
    let records = read_spectra_csv(text.as_bytes(), cfg.units)?;
    if records.is_empty() {
        bail!("input {} contains no spectra", cfg.input.as_ref().expect("validated").display());
    }
    let mut by_size: BTreeMap<usize, Vec<_>> = BTreeMap::new();
    for r in records {
        by_size.entry(r.array_size).or_default().push(r);
    }

    let mut stats_body = String::from("# sigma = population standard deviation (divisor N)\n");
    stats_body.push_str(&format!("{STATS_HEADER}\n"));
    let mut regime_body = String::from("array_size,gap_index,ratio,regime\n");
    let mut summary = String::new();
    for (size, recs) in &by_size {
        let report = separation_stats(recs).with_context(|| format!("arrays of size {size}"))?;
        let regimes = regime_classify(&report.stats, cfg.threshold)?;
        stats_body.push_str(&format!("# array_size = {size}\n"));
        if !report.excluded.is_empty() {
            stats_body.push_str(&format!("# excluded (mode count != array size) = {}\n", report.excluded.join(" ")));
        }
        let csv = write_stats_csv(&report.stats);
        stats_body.push_str(csv.split_once('\n').map_or("", |(_, rows)| rows));

        summary.push_str(&format!(
            "array size {size}: {} arrays used, {} excluded\n",
            report.stats.first().map_or(0, |s| s.count),
            report.excluded.len()
        ));
        for ((index, regime), s) in regimes.iter().zip(&report.stats) {
            regime_body.push_str(&format!("{size},{index},{},{regime}\n", sig9(s.ratio)));
            summary.push_str(&format!("  gap {index}: sigma/mu = {:.4} -> {regime}\n", s.ratio));
        }
    }

    let mut artifacts = vec![Artifact {
        path: cfg.output.clone(),
        contents: with_metadata(cfg, &[], &stats_body),
    }];
    if let Some(out) = &cfg.output {
        artifacts.push(Artifact {
            path: Some(sibling(out, "regime")),
            contents: with_metadata(cfg, &[], &regime_body),
        });
    }
    Ok(Outcome { artifacts, summary })
}

fn observed_stats(cfg: &RunConfig) -> Result<Vec<SeparationStats>> {
    let text = read_input(cfg)?;
    let header = first_data_line(&text);
    if header == STATS_HEADER {
        return Ok(read_stats_csv(text.as_bytes())?);
    }
    if header != SPECTRA_HEADER {
        bail!("invalid `input`: expected a spectra CSV (`{SPECTRA_HEADER}`) or a stats CSV (`{STATS_HEADER}`)");
    }
    let records = read_spectra_csv(text.as_bytes(), cfg.units)?;
    let n = cfg.graph.num_sites();
    let matching: Vec<_> = records.into_iter().filter(|r| r.array_size == n).collect();
    Ok(separation_stats(&matching)
        .with_context(|| format!("spectra of {n}-cavity arrays (the configured {}x{} geometry)", cfg.rows, cfg.cols))?
        .stats)
}

fn fit(cfg: &RunConfig) -> Result<Outcome> {
    let stats = observed_stats(cfg)?;
    let init = FitInit {
        couplings: cfg.couplings,
        sigma_f: cfg.sigma_f,
    };
    let options = FitOptions {
        search_trials: cfg.trials,
        final_trials: cfg.final_trials,
        master_seed: cfg.seed,
        fit_j2: cfg.fit_j2,
        ..FitOptions::default()
    };
    let r = fit_parameters(&stats, &cfg.graph, &init, &options)?;

    let mut body = String::from("quantity,value\n");
    let scalar = |name: &str, v: String| format!("{name},{v}\n");
    body.push_str(&scalar("t", sig9(r.t)));
    body.push_str(&scalar("j1", sig9(r.j1)));
    body.push_str(&scalar("j2", sig9(r.j2)));
    body.push_str(&scalar("sigma_f", sig9(r.sigma_f)));
    body.push_str(&scalar("objective", sig9(r.objective)));
    body.push_str(&scalar("iterations", r.iterations.to_string()));
    body.push_str(&scalar("converged", r.converged.to_string()));
    body.push_str(&scalar("clamped", r.clamped.join(" ")));
    for g in &r.residuals {
        body.push_str(&scalar(&format!("mu_residual_gap_{}", g.index), sig9(g.mu_sim - g.mu_obs)));
        body.push_str(&scalar(&format!("sigma_residual_gap_{}", g.index), sig9(g.sigma_sim - g.sigma_obs)));
    }

    let mut summary = format!(
        "t = {:.4} THz, j1 = {:.4} THz, j2 = {:.4} THz, sigma_f = {:.4} THz\nobjective = {:.3e} THz^2 after {} iterations ({})\n",
        r.t,
        r.j1,
        r.j2,
        r.sigma_f,
        r.objective,
        r.iterations,
        if r.converged { "converged" } else { "iteration cap reached" }
    );
    if !r.clamped.is_empty() {
        summary.push_str(&format!("clamped to 0: {}\n", r.clamped.join(", ")));
    }
    for g in &r.residuals {
        summary.push_str(&format!(
            "  gap {}: mu {:.4} vs {:.4}, sigma {:.4} vs {:.4}\n",
            g.index, g.mu_sim, g.mu_obs, g.sigma_sim, g.sigma_obs
        ));
    }
    Ok(Outcome {
        artifacts: vec![Artifact {
            path: cfg.output.clone(),
            contents: with_metadata(cfg, &[], &body),
        }],
        summary,
    })
}

fn simulate(cfg: &RunConfig) -> Result<Outcome> {
    let records = simulate_records(
        &cfg.graph,
        &cfg.couplings,
        &DisorderModel::new(cfg.sigma_f)?,
        cfg.count,
        cfg.seed,
    )?;
    Ok(Outcome {
        artifacts: vec![Artifact {
            path: cfg.output.clone(),
            contents: with_metadata(cfg, &[], &write_spectra_csv(&records)),
        }],
        summary: format!("{} simulated {}-cavity spectra", records.len(), cfg.graph.num_sites()),
    })
}

/// Writes artifacts; those without a path go to stdout.
pub fn emit(outcome: &Outcome) -> Result<()> {
    for a in &outcome.artifacts {
        match &a.path {
            Some(p) => fs::write(p, &a.contents).with_context(|| format!("writing {}", p.display()))?,
            None => print!("{}", a.contents),
        }
    }
    if outcome.artifacts.iter().all(|a| a.path.is_some()) {
        println!("{}", outcome.summary.trim_end());
    } else {
        eprintln!("{}", outcome.summary.trim_end());
    }
    Ok(())
}
