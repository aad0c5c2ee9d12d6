//! Boundary analysis for stable polynomials in two variables.
//!
//! The crate works with exact Gaussian-rational polynomials where it can and
//! falls back to double precision for algebraic numbers that are not rational.

pub mod coeff;
pub mod error;
pub mod homog;
pub mod stability;
pub mod poly;
pub mod puiseux;
pub mod regularity;
pub mod numerator;
pub mod integrability;
pub mod boundary;
pub mod corpus;
pub mod realization;

pub use coeff::{Coefficient, GaussRat, Precision};
pub use error::{Error, Result};
pub use poly::{Domain, Polynomial};
