//! `cca`: disorder sweeps, photonic-molecule tables, spectra analysis and
//! coupling fits for coupled cavity arrays.

mod commands;
mod config;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{CommandKind, Flags, RunConfig};

#[derive(Parser)]
#[command(name = "cca", version, about = "Spectra of disordered coupled cavity arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ensemble statistics over a grid of disorder strengths
    Sweep(Flags),
    /// Ensemble statistics at a single disorder strength
    Ensemble(Flags),
    /// Two-cavity mean/std of the splitting over a (j, sigma_f) grid
    Molecule(Flags),
    /// Separation statistics and regime report for measured spectra
    Analyze(Flags),
    /// Fit couplings and disorder to measured spectra or statistics
    Fit(Flags),
    /// Write simulated spectra in the analyze/fit input format
    Simulate(Flags),
}

impl Command {
    fn split(&self) -> (CommandKind, &Flags) {
        match self {
            Command::Sweep(f) => (CommandKind::Sweep, f),
            Command::Ensemble(f) => (CommandKind::Ensemble, f),
            Command::Molecule(f) => (CommandKind::Molecule, f),
            Command::Analyze(f) => (CommandKind::Analyze, f),
            Command::Fit(f) => (CommandKind::Fit, f),
            Command::Simulate(f) => (CommandKind::Simulate, f),
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (kind, flags) = cli.command.split();
    let cfg = RunConfig::resolve(kind, flags)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .context("starting worker threads")?;
    let outcome = pool.install(|| commands::run(&cfg))?;
    commands::emit(&outcome)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
