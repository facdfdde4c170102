//! Differential geometry of regular curves in ℝⁿ.
//!
//! The crate computes all `n − 1` curvatures of a curve directly from its
//! derivative jet through volume identities, rebuilds curves from curvature
//! or derivative-norm profiles, bounds the distortion of curvatures under
//! affine maps, and simulates the generalized Heisenberg spin chain built on
//! multi-factor cross products.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod distortion;
pub mod error;
pub mod frenet;
pub mod gram;
pub mod heisenberg;
pub mod invariants;
pub mod io;
pub mod jets;
pub mod linalg;
pub mod multivector;
pub mod selftest;
pub mod stencil;
pub mod svd;

pub use error::{Error, ErrorCategory, Result};
pub use linalg::{Matrix, Vector};
