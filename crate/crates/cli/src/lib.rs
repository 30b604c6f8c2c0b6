//! Experiment runner for `sfpate`: privacy sweeps written as CSV, bound
//! verification trials written as JSON lines, and summaries of sweep CSVs.

// `!(x > 0.0)` style checks are how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod summary;
pub mod sweep;
pub mod theory_suite;

pub use config::ExperimentConfig;
pub use error::CliError;
