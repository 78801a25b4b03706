//! Exact finite-stage computations for the translation-invariant measure built
//! from a ring of clipped fat Cantor translates.
//!
//! Everything is exact: coordinates and measures are arbitrary-precision
//! rationals, diameters live in `Q[sqrt d]`, and every certificate can be
//! re-checked by box algebra.

pub mod cantor;
pub mod cover;
pub mod error;
pub mod geometry;
pub mod hausdorff;
pub mod packing;
pub mod rational;
pub mod ring;

pub use error::{Error, Result};

