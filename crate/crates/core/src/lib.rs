//! Fair classifiers trained under differential privacy of the protected
//! group attribute.
//!
//! Two teacher-ensemble pipelines transfer knowledge to a student through a
//! Gaussian noisy-argmax vote:
//!
//! * the *fair student* variant ([`pate::run_sf_s`]) has teachers predict the
//!   group attribute and trains a fairness-constrained student on the noisy
//!   group votes;
//! * the *fair teachers* variant ([`pate::run_sf_t`]) trains fairness-constrained
//!   teachers and a plain student on their noisy label votes.
//!
//! The crate also ships the randomized-response baseline, a Rényi-DP
//! accountant, a Lagrangian-dual fair trainer for a small MLP, and a harness
//! that checks the fairness-transfer bounds empirically.

// `!(x > 0.0)` style checks are how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod fairness;
pub mod matrix;
pub mod model;
pub mod pate;
pub mod privacy;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
pub use matrix::Matrix;
