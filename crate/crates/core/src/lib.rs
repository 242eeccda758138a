//! Monte Carlo engine for kinetic wealth-exchange models and N-dimensional
//! elastic gases, with the statistics needed to compare their equilibria
//! against gamma laws and to quantify inequality.
//!
//! - [`exchange`]: pairwise trades with saving propensity, equilibrium sampling,
//!   and the saving-propensity / effective-dimension map.
//! - [`gas`]: equal-mass elastic collisions in `N` dimensions.
//! - [`stats`]: gamma law, fitting, KS distance, histograms, Gini and Lorenz.
//! - [`entropy`]: multinomial entropy, hypersphere factors and the
//!   constrained variational check of the gamma law.
//! - [`harness`]: configuration-driven experiment runner and file formats.

// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod exchange;
pub mod gas;
pub mod harness;
pub mod numerics;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
