//! Censored time-to-event analysis for clinical cohorts.

// Negated comparisons are used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cox;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod exec;
pub mod km;
pub mod logodds;
pub mod parametric;
pub mod report;
pub mod special;
pub mod synth;

pub use error::{Error, Result};
