// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod error;
pub mod geom;
pub mod mesh;
pub mod optimizer;
pub mod report;
pub mod sparse;
pub mod splitting;
pub mod spectrum;

pub use error::{Error, Result};
