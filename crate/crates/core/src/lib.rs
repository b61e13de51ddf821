//! Numerical laboratory for the pullback dynamics of the non-autonomous
//! reaction-diffusion equation
//!
//! ```text
//! ∂u/∂t - Δu + λu = f(x, u) + g(x, t)
//! ```
//!
//! posed on the whole space and truncated here to `[-L, L]^n` (n = 1, 2) with
//! homogeneous Dirichlet data. The crate simulates the two-parameter solution
//! operator, evaluates the dissipativity estimates that make the dynamics
//! contracting in the pullback sense (absorbing bounds, uniform H¹ and
//! time-derivative bounds, tail smallness outside large balls), and
//! approximates the time-indexed attracting family together with its
//! invariance and attraction diagnostics in L² and H¹.
//!
//! Modules follow the pipeline: [`domain`] discretizes, [`model`] fixes the
//! equation data and validates its structural conditions, [`solver`] steps in
//! time, [`energy`] measures, [`estimates`] checks the bounds, [`attractor`]
//! approximates the attracting family, and [`scenario`] bundles a full
//! experiment configuration.

// Parameter guards use the negated form `!(x > 0)` on purpose: it also
// rejects NaN, which `x <= 0` lets through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attractor;
pub mod domain;
pub mod energy;
pub mod error;
pub mod estimates;
pub mod model;
mod quad;
pub mod scenario;
pub mod solver;

pub use error::{Error, Result};
