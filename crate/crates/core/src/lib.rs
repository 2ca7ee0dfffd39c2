//! Adaptive MCMC by importance resampling and equi-energy moves, with exact
//! finite-state computations that check their convergence behaviour.

// `!(x > 0.0)` is the NaN-rejecting form used in argument checks.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod harness;
pub mod prob;
pub mod samplers;

pub use error::{Error, Result};
