pub mod bernoulli;
pub mod builtins;
pub mod chen_ruan;
pub mod error;
pub mod frobenius;
pub mod graph;
pub mod group;
pub mod psi;
pub mod rmatrix;
pub mod scalar;
pub mod series;

pub use error::{Error, ErrorClass, Result};
pub use scalar::{Rational, Scalar, ScalarContext};
