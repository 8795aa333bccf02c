//! Overspecified mixture discriminant analysis.
//!
//! Fits the unbalanced two-component mixture
//! `G(θ, σ²) = (1−p)·N(−θ, σ²I) + p·N(θ, σ²I)` to data that really come
//! from a single Gaussian, and studies how fast EM drives the fitted
//! mixture back to that Gaussian in KL divergence, both at the population
//! level and from finite samples. The two-class MDA classifier built on
//! top of the fit is in [`mda`]; [`experiments`] reproduces the numerical
//! studies and writes CSV/JSON results.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod matrix;
pub mod mda;
pub mod mixture;
pub mod numerics;
pub mod population;
pub mod sample;
pub mod trace;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use mixture::{MixtureParams, Weight};
pub use numerics::{QuadratureRule, RngStream};
pub use population::PopulationSetting;
pub use trace::{EmTrace, TraceEntry};
