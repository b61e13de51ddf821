//! Harness for the pullback-lab numerical laboratory: configuration loading
//! and validation, experiment orchestration, artifact persistence, and the
//! summary report generator behind the `pullback-lab` binary.

// Parameter guards use `!(x > 0)` on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod runner;
