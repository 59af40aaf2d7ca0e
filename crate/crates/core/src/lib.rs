//! Shifted-partial-derivative (SPDP) coefficient matrices over exact fields.
//!
//! The crate builds the matrix whose rows are the coefficient vectors of
//! `m * d_S p` (|S| = kappa, deg m <= ell) in the ambient basis of
//! multilinear monomials of degree <= deg(p) - kappa + ell, and computes its
//! exact rank and codimension. Around that core sit the polynomial families
//! used as benchmarks, a small local-width model with profile counting, and
//! an end-to-end circuit -> CNF -> window -> rank pipeline.

pub mod algebra;
pub mod error;
pub mod families;
pub mod localwidth;
pub mod pipeline;
pub mod spdp;
pub mod verify;

pub use error::{Error, Result};

/// Version string embedded in every report.
pub const TOOL_VERSION: &str = concat!("spdp ", env!("CARGO_PKG_VERSION"));
