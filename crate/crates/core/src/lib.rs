// `!(x > 0.0)` is used on purpose throughout so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cell;
pub mod cli;
pub mod dtn;
pub mod edge_ode;
pub mod error;
pub mod fixtures;
pub mod fractal;
pub mod gamma;
pub mod scaling;
pub mod verify;

pub use error::{Error, Result};
