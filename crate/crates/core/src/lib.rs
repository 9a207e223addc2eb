//! Energy-efficiency model for a cognitive-radio secondary user that mixes
//! ambient backscatter with harvest-then-transmit under imperfect
//! energy-detector sensing.
//!
//! [`model`] holds the analytic averages, [`optimizer`] the optimal
//! threshold, split and sensing time, [`oracle`] brute-force references,
//! [`simulator`] a frame-level Monte Carlo and [`presets`] the figure sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod gradients;
pub mod model;
pub mod modes;
pub mod optimizer;
pub mod oracle;
pub mod presets;
pub mod simulator;
pub mod special;

pub use error::{Error, Result};
