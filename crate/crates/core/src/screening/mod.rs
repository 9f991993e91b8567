//! Correlation screening.
//!
//! Thresholding a sample (partial) correlation matrix at level `ρ` yields
//! a graph whose false edges, for large `p`, follow a closed-form law in
//! `(n, p, ρ)` that is independent of the true covariance. This module
//! evaluates that law ([`law`]), inverts it into design curves
//! ([`design`]), builds the thresholded graphs either densely
//! ([`screen_edges`]) or through a range search over unit-sphere points
//! ([`ball_graph`]), and checks the law by Monte Carlo ([`phase`]).

pub mod ball_graph;
pub mod design;
pub mod graph;
pub mod kdtree;
pub mod law;
pub mod phase;
pub mod sweep;

pub use ball_graph::{ball_graph, BallMode};
pub use design::{min_detectable_correlation, min_sample_size};
pub use graph::{screen_edges, screen_hubs, Edge, EdgeGraph, ScreenResult};
pub use law::{critical_threshold, false_positive_prob, sphere_constant, ScreeningLaw};
pub use phase::{crossing, phase_transition_curve, NullModel, PhaseConfig, PhaseRow, PhaseTable, ScreeningPath};
pub use sweep::{best_threshold, explosion_onset, support_sweep, SweepRow};
