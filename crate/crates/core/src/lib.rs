//! Numerical laboratory for the free-boundary problem `a_ij ∂_ij v = v^p`, `p ∈ [0, 1)`, with
//! coefficient matrices that are discontinuous at the origin.
//!
//! The crate solves the problem on the unit disk with a penalized polar finite-difference
//! scheme, measures growth and blow-up homogeneity of solutions, evaluates the weighted
//! homogeneity functional, and constructs the homogeneous global solutions against which
//! everything else is validated.

pub mod blowup;
pub mod cli;
pub mod coefficients;
pub mod error;
pub mod io;
pub mod penalty;
pub mod polar;
pub mod profiles;
pub mod solver;
pub mod spruck;

pub use coefficients::{CoefficientModel, EllipticityBounds, ModelKind};
pub use error::{Error, Result};
pub use polar::{FieldMeta, PolarField, PolarGrid, Quantity, RadialSpacing};

/// Natural scaling exponent `β = 2/(1-p)` of `L v = v^p`.
#[inline]
pub fn scaling_exponent(p: f64) -> f64 {
    2.0 / (1.0 - p)
}
