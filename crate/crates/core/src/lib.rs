//! Stochastic Lotka-Volterra competition on the unit interval with Neumann
//! boundary conditions and multiplicative space-time white noise.
//!
//! * [`kernel`]: the Neumann heat kernel, its semigroup, and kernel estimates.
//! * [`noise`]: Brownian-sheet and spectral noise, and their equivalence.
//! * [`model`]: coefficients, state, and the truncated reaction term.
//! * [`solver`]: finite-difference and spectral-Galerkin time stepping.
//! * [`analysis`]: estimators and verdicts computed from ensembles.

pub mod analysis;
pub mod error;
pub mod expr;
pub mod grid;
pub mod kernel;
pub mod model;
pub mod noise;
pub mod rng;
pub mod solver;
pub mod stats;
pub mod transform;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::GridFunction;
