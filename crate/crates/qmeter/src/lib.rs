//! Quantitative analysis of finite-dimensional quantum measurement scenarios:
//! outcome statistics, squared measurement error and its minimizing value
//! assignment, zero-error certificates, the A = B + M operator decomposition,
//! and joint quasiprobability tables with negativity detection.

pub mod apparatus;
pub mod cli;
pub mod determinism;
pub mod error;
pub mod error_analysis;
pub mod hilbert;
pub mod measurement;
pub mod quasiprob;
pub mod sampler;
pub mod scenario;

pub use error::{Error, Result};
