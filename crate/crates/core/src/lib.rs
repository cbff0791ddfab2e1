//! Open-system thermophoresis toolkit.
//!
//! Builds microscopic Lindblad generators for discrete quantum systems coupled to
//! several thermal baths, solves for steady states and heat currents, and provides
//! closed-form three-level (Lambda and V) results alongside the N-site chain model.
//!
//! Conventions: `hbar = k_B = 1`, energies and temperatures in units of a reference
//! gap, column-stacking vectorization for superoperators.

// `!(x > 0.0)` also rejects NaN, which is the point of those checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod davies;
pub mod error;
pub mod operator;
pub mod three_level;

pub use error::{Error, Result};
