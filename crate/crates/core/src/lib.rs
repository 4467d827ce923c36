//! Spectra of disordered coupled optical cavity arrays.
//!
//! The crate builds tight-binding Hamiltonians for grids of photonic-crystal
//! cavities, diagonalises them over Monte Carlo ensembles of Gaussian
//! fabrication disorder, provides closed-form statistics for the two-cavity
//! photonic molecule, and inverts the ensemble model to estimate couplings
//! and disorder from measured mode frequencies.
//!
//! All frequencies are ordinary frequencies in THz.
//!
//! ```
//! use cca_core::{build_grid_geometry, run_ensemble, CouplingSet, DisorderModel};
//!
//! let graph = build_grid_geometry(2, 2, false)?;
//! let stats = run_ensemble(&graph, &CouplingSet::fdtd_default(), &DisorderModel::new(0.0)?, 10, 1)?;
//! assert_eq!(stats.mean_seps.len(), 3);
//! # Ok::<(), cca_core::CcaError>(())
//! ```

pub mod disorder;
pub mod eigen;
pub mod error;
pub mod estimation;
pub mod format;
pub mod lattice;
pub mod molecule;
pub mod quadrature;
pub mod simplex;

pub use disorder::{
    derive_seed, run_ensemble, sample_detunings, sweep_sigma, trial_rng, trial_spectrum, DisorderModel,
    EnsembleStats, SweepTable, DEFAULT_TRIALS,
};
pub use eigen::{eigenvalues_symmetric, separations, EigenSpectrum};
pub use error::{CcaError, Result};
pub use estimation::{
    dominant_separations, fit_parameters, regime_classify, separation_stats, FitInit, FitOptions, FitResult, Regime,
    SeparationStats, SpectrumRecord, Units,
};
pub use lattice::{
    build_grid_geometry, build_hamiltonian, classify_pair, CavitySite, CouplingClass, CouplingGraph, CouplingSet,
    SymmetricMatrix,
};
pub use molecule::{
    molecule_mean_separation, molecule_moments, molecule_separation, molecule_std_separation, uncoupled_ratio,
    MoleculeParams,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/eigensolver.md")]
    mod eigensolver {}
    #[doc = include_str!("../../../book/src/disorder.md")]
    mod disorder {}
    #[doc = include_str!("../../../book/src/molecule.md")]
    mod molecule {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
