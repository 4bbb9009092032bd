//! Exact finite-sample bias and mean-squared error of maximum-likelihood
//! estimators for the Ornstein–Uhlenbeck process, with a Monte Carlo oracle.

pub mod cli;
pub mod error;
pub mod estimate;
pub mod invert;
pub mod model;
pub mod moments;
pub mod oracle;
pub mod scalar;
pub mod simulate;
pub mod transform;

pub use error::{Error, Result};
