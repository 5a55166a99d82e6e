mod bivariate;
mod matrix;
mod tseries;
mod zseries;

pub use bivariate::BiSeries;
pub use matrix::Matrix;
pub use tseries::{Monomial, TSeries, EXACT};
pub use zseries::{scalar_zseries, ZSeries, POLYNOMIAL};
