// `!(x < y)` is used on purpose so that NaN fails range checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fredholm;
pub mod gap;
pub mod ladder;
pub mod numerics;
pub mod orthopoly;
pub mod report;
pub mod weight;

pub use error::{Error, Result};
pub use numerics::{Complex, Precision, QuadRule, Real};
pub use report::ResidualReport;
