// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod eval;
pub mod features;
pub mod forest;
pub mod geo;
pub mod persistence;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
