//! Numerical laboratory for linear wave equations on time-dependent domains
//! with timelike moving boundaries.
//!
//! The crate provides exact pointwise evaluation of null-cone geometry and
//! warped Carleman machinery in any spatial dimension, a convergent 1+1D
//! finite-difference solver on two-curve moving domains, quadrature checks
//! of the multiplier and Carleman estimates, observability-constant scans,
//! and a discrete Hilbert Uniqueness Method for boundary control.

pub mod carleman;
pub mod error;
pub mod estimate;
pub mod gtc;
pub mod hum;
pub mod jet;
pub mod minkowski;
pub mod solver;
pub mod warped;

pub use error::{Error, Result};

/// Format a float with 17 significant digits so artifacts are reproducible
/// across languages.
pub fn fmt_g17(x: f64) -> String {
    format!("{:.16e}", x)
}
