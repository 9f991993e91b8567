//! Correlation mining for the sample-starved regime (`n ≪ p`).
//!
//! The crate estimates correlation and partial-correlation structure from a
//! handful of samples, screens it for large entries with closed-form control
//! of the false-edge probability, recovers sparse precision support with a
//! convex pseudo-likelihood solver, and evaluates the sample-complexity laws
//! that tell an experimenter how many samples a task needs.
//!
//! ```
//! use corrmine::generators::{sample_gaussian, sparse_random_precision, SparsePrecisionConfig};
//! use corrmine::matrix::{correlation_matrix, sample_covariance};
//! use corrmine::screening::screen_edges;
//!
//! let truth = sparse_random_precision(&SparsePrecisionConfig::new(30, 2, 7)).unwrap();
//! let data = sample_gaussian(&truth, 200, 11).unwrap();
//! let r = correlation_matrix(&sample_covariance(&data).unwrap()).unwrap();
//! let result = screen_edges(&r, 0.9, Some(data.n())).unwrap();
//! assert_eq!(result.n_e, result.graph.edges.len());
//! ```
//!
//! Modules follow the pipeline: [`matrix`] turns raw samples into
//! covariance, correlation, precision and partial-correlation matrices;
//! [`generators`] builds ground-truth models and draws Gaussian data;
//! [`screening`] thresholds, evaluates the phase-transition law and runs the
//! Monte Carlo harness; [`concord`] fits the pseudo-likelihood estimator;
//! [`regimes`] evaluates the sample-complexity tables; [`io`] reads and
//! writes the CSV and triplet formats.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concord;
pub mod error;
pub mod generators;
pub mod io;
pub mod matrix;
pub mod regimes;
pub mod rng;
pub mod screening;

pub use error::{Error, Result};
pub use matrix::{DataMatrix, Role, SymMatrix, UnitSphereMatrix, ZeroTolerance};
