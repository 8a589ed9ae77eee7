//! Tool morphology optimization for contact-rich planar manipulation.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: cage parameterization and mean value coordinates
//! - [`diffsim`]: forward-mode differentiable rigid-body simulation
//! - [`scenarios`]: Winding, Flipping, Pushing and Reaching tasks
//! - [`continual`]: the batch-sequential optimizer and its two baselines
//! - [`harness`]: seeded experiments, landscapes and artifact output

pub mod continual;
pub mod diffsim;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod scenarios;

pub use error::{Error, Result};
