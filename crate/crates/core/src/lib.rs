//! Compress a building stock into representative buildings and geographical
//! groups, search techno-economic Pareto sets over the compressed model and
//! map selected solutions back onto every building.

// Negated comparisons double as NaN rejection in input checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod clustering;
pub mod demand;
pub mod error;
pub mod esm;
pub mod features;
pub mod geodata;
pub mod network;
pub mod optimizer;
pub mod pipeline;
pub mod seed;
pub mod solar;

pub use error::{Error, ErrorClass, Result};
