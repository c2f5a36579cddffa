//! Condition-number-constrained covariance approximation: the nearest
//! positive definite matrix, in the Frobenius norm, whose condition number
//! stays below a given bound.

pub mod bench;
pub mod cli;
pub mod datagen;
pub mod error;
pub mod io;
pub mod kappa;
pub mod linalg;
pub mod oracle;
pub mod pipeline;
pub mod solver;

pub use error::{Error, Result};
