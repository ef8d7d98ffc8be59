//! Binary classifiers that maximize F-beta (or accuracy) by evolving a
//! level-set decision function over kernel density estimates of both classes.
//!
//! The pipeline is: [`data`] → [`density`] → [`energy`] → [`solver`], wrapped
//! end to end by [`classifier::fit`]. [`harness`] holds baselines and the
//! cross-validation driver.

pub mod classifier;
pub mod data;
pub mod density;
pub mod energy;
pub mod error;
pub mod field;
pub mod harness;
pub mod heaviside;
pub mod metrics;
pub mod par;
pub mod solver;

pub use error::{Error, ErrorKind, Result};
