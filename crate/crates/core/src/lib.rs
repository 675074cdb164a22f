//! Numerical laboratory for coupling-based mixing of the complex
//! Ginzburg–Landau equation driven by bounded Haar red noise.

// `!(x > 0.0)` is used on purpose to reject NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod coupling;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod lab;
pub mod noise;
pub mod rng;

pub use error::{Error, Result};
pub use lab::Lab;
