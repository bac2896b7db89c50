//! Optimal discrimination of two projective single-qubit measurements.
//!
//! The crate computes the best achievable success probability at a fixed
//! rate of inconclusive outcomes, both for entanglement-assisted probes and
//! for unentangled single-qubit probes, and cross-checks those closed forms
//! against independent numerical routes:
//!
//! - [`geometry`]: measurement bases, probe states, the `σ_Y` relation and
//!   the intermediate filter.
//! - [`strategies`]: closed-form optimal curves and their characteristic
//!   points, plus the numerical convex-hull check.
//! - [`convexity`]: analytic second derivatives along the single-probe curve,
//!   validated against finite differences.
//! - [`oracle`]: process-POVM testers, covariance symmetrization and a
//!   constrained numerical optimizer.
//! - [`simulator`]: Monte Carlo model of the feed-forward photonic experiment.
//! - [`cli`]: the reproducible command runner behind the `qmdisc` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod convexity;
pub mod cubic;
pub mod error;
pub mod geometry;
pub mod hull;
pub mod manifest;
pub mod oracle;
pub mod rng;
pub mod simulator;
pub mod strategies;

pub use error::{Error, Result};
pub use geometry::{FilterOperator, MeasurementPair, PureQubitState};
pub use strategies::{SingleQubitStrategy, StrategyPoint};

/// Tolerance for identities that hold exactly in real arithmetic.
pub const EXACT_TOL: f64 = 1e-12;
