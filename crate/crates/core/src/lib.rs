//! Evaluates how well a proving-ground road network accommodates a set of
//! recorded multi-vehicle driving scenarios.
//!
//! Each scenario is placed on the map as a rigid body by a partially
//! resampling bootstrap particle filter whose likelihood is a DTW-based
//! road-compatibility score; per-category means of the best placements give
//! the baseline effectiveness of the map.

// `!(x > 0.0)` is used on purpose to reject NaN alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod dtw;
pub mod error;
pub mod geo;
pub mod placement;
pub mod roadnet;
pub mod scenario;

pub use error::{Error, Result};
