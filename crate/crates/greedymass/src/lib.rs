//! Solvers and Monte Carlo estimators for greedy paths and animals over
//! marked point processes.
//!
//! The crate has five parts:
//!
//! - [`geometry`] — norms, paths/animals, cones and diamonds, MSTs,
//!   cylinder decompositions;
//! - [`pointproc`] — samplers for marked Poisson, lattice and determinantal
//!   processes, mark-distribution analytics, truncation layers and
//!   factorial-moment estimation;
//! - [`solvers`] — exact maximal-mass path and animal optimization on
//!   finite realizations, with brute-force oracles;
//! - [`estimators`] — Monte Carlo estimation of the scaling limits and
//!   property diagnostics (concavity, symmetry, tail and maximal
//!   inequalities, moment properties, divergence probes);
//! - [`cli`] — a configuration-driven runner producing reproducible JSON,
//!   CSV and SVG artifacts.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod pointproc;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
