//! Circuit-level simulation of voltage-controlled flux-qubit arrays.
//!
//! The crate models a four-junction superconducting loop with a gate-biased
//! island, quantizes it in the node charge basis, and derives from the exact
//! spectra an effective Ising (ZZ) description of capacitively coupled chains
//! and grids. On top of the effective model it provides error budgets for the
//! voltage-controlled two-qubit gate and a pulse scheduler that builds and
//! simulates cluster-state generation sequences.
//!
//! Layering, from bottom to top:
//!
//! * [`units`] holds physical constants and the unit conventions used
//!   everywhere else (GHz, ns, fF, uV, flux in units of the flux quantum).
//! * [`spec`] and [`config`] describe devices; [`basis`], [`operator`] and
//!   [`hamiltonian`] build sparse charge-basis Hamiltonians.
//! * [`eigen`] solves for the lowest eigenpairs and certifies charge-cutoff
//!   convergence; [`spectrum`] reduces spectra to two-level parameters and
//!   sweeps them over control knobs.
//! * [`network`] assembles multi-qubit capacitance networks; [`ising`]
//!   extracts pairwise ZZ couplings and whole-array Ising models.
//! * [`budget`] turns couplings and noise amplitudes into gate error rates.
//! * [`schedule`], [`sim`] and [`graph_state`] build pi-pulse echo schedules,
//!   evolve statevectors under the Ising model, and score the result against
//!   cluster-state targets.

pub mod basis;
pub mod budget;
pub mod config;
pub mod eigen;
pub mod error;
pub mod graph_state;
pub mod hamiltonian;
pub mod ising;
pub mod network;
pub mod operator;
pub mod schedule;
pub mod sim;
pub mod spec;
pub mod spectrum;
pub mod units;

pub use error::{Error, Result};
pub use spec::FluxQubitSpec;
