//! Numerical laboratory for reversible random walks among random
//! conductances on finite lattices.
//!
//! The crate covers the standard toolbox around the model:
//!
//! * [`env`] — conductance environments (iid, percolation, line-constant,
//!   traps) with reproducible counter-based sampling and a binary format;
//! * [`cluster`] — percolation components and working-cluster selection;
//! * [`walk`] — discrete-time, constant-speed and variable-speed walks,
//!   local drift and blow-up diagnostics;
//! * [`potential`] — discrete electrostatics: Dirichlet energy, relaxation
//!   and conjugate-gradient solvers, effective resistance, plate and box
//!   problems, Green's functions, Poisson equation;
//! * [`corrector`] — harmonic embeddings, periodized correctors, the
//!   homogenized diffusion matrix and sublinearity diagnostics;
//! * [`heatkernel`] — exact n-step kernels, return-probability series,
//!   isoperimetric profiles, the Morris-Peres mixing threshold and trap
//!   experiments;
//! * [`gradfield`] — Gaussian gradient fields with covariance (-L)^{-1},
//!   mixture potentials and the alternating Gibbs sampler;
//! * [`homogenize`] — the lattice Cauchy problem against its homogenized
//!   limit, and rescaled resolvent pairings.
//!
//! Everything is deterministic in an experiment seed. See the `examples/`
//! directory for one runnable walkthrough per capability and the `rcm`
//! binary for the batch interface.

pub mod cluster;
pub mod config;
pub mod corrector;
pub mod domain;
pub mod env;
pub mod error;
pub mod gradfield;
pub mod heatkernel;
pub mod homogenize;
pub mod potential;
pub mod rng;
pub mod solver;
pub mod stats;
pub mod walk;

pub use domain::{BoundaryMode, LatticeDomain};
pub use env::{build_environment, build_trap_environment, Environment, EnvironmentLaw};
pub use error::{RcmError, Result};

/// Crate version string recorded in output provenance blocks.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
