//! Numerical laboratory for typicality and quantum ergodicity in small isolated
//! quantum systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`hilbert`]: states, density matrices, Hermitian operators, partial trace.
//! - [`sampler`]: uniform (Haar) pure-state sampling with reproducible streams.
//! - [`concentration`]: Lévy-type concentration bounds for reduced density
//!   matrix entries and their Monte Carlo verification.
//! - [`macroscopic`]: coarse-grained observables, energy shells and macro
//!   partitions `{P_ν}`.
//! - [`dynamics`]: the ball-and-gas lattice model, exact-diagonalisation
//!   evolution and ergodic time-fraction statistics.
//! - [`superposition`]: Schmidt decomposition, branch profiles and the
//!   qubit-pointer measurement model.
//! - [`cli`]: configuration, experiment runners and report emission.
//!
//! Heavy loops (Monte Carlo trials, time grids) go through [`exec::Execution`],
//! which runs on rayon when the `parallel` feature is enabled and falls back
//! to a plain sequential loop otherwise. Results never depend on the worker
//! count.

pub mod cli;
pub mod concentration;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod hilbert;
pub mod macroscopic;
pub mod sampler;
pub mod spectral;
pub mod superposition;

pub use error::{Error, Result};
pub use exec::Execution;
pub use hilbert::{
    distance_to_maximally_mixed, partial_trace, purity, DensityMatrix, HermitianOperator,
    HilbertDims, StateVector, Subsystem, Units,
};
pub use spectral::SpectralDecomposition;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
