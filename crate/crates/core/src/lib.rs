//! Sparse sampling recovery over the trigonometric system.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classes;
pub mod cli;
pub mod config;
pub mod discretization;
pub mod error;
pub mod greedy;
pub mod index_sets;
pub mod linalg;
pub mod rate;
pub mod recovery;
pub mod rng;
pub mod trig;

pub use error::{Error, Result};
