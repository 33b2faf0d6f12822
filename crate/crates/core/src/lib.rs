//! Numerical laboratory for Schrödinger operators with a nonnegative Poisson
//! random potential.
//!
//! The crate is organised bottom-up:
//!
//! * [`point_process`] samples (marked) Poisson configurations and carries the
//!   exact Poisson tail oracles used by the property tests.
//! * [`lattice`] reduces configurations to occupancy classes on an η-grid,
//!   classifies acceptability and implements basic events and the density
//!   condition for free sites.
//! * [`operator`] assembles finite-difference Hamiltonians with Dirichlet
//!   boundary conditions, solves them, and classifies good / jgood boxes.
//! * [`covering`] builds standard ℓ-coverings and scale ladders.
//! * [`msa`] drives the Monte Carlo multiscale experiments.
//! * [`measurement`] measures eigenfunction decay, eigenfunction correlations,
//!   multiplicities and dynamical moments.

pub mod covering;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod measurement;
pub mod msa;
pub mod operator;
pub mod point_process;
pub mod rng;

pub use error::{Error, Result};
pub use geometry::Cube;
