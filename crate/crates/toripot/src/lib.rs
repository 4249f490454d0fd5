//! Exact truncated arithmetic over the universal Novikov field, toric
//! superpotentials built from moment-polytope data, critical-point solving by
//! leading-term extraction plus Newton lifting, and order-by-order matching of
//! unknown correction coefficients against a reference model.
//!
//! Conventions used throughout:
//! - every series carries an explicit truncation cutoff E and is only trusted
//!   for exponents strictly below E;
//! - exponents are exact rationals, coefficients are exact rationals or
//!   complex floats depending on the per-run scalar mode, and the two modes
//!   never mix inside one operation;
//! - exact mode is authoritative; the float backend exists for leading data
//!   that has no rational representation.

pub mod error;
pub mod matcher;
pub mod novikov;
pub mod potential;
pub mod rat;
pub mod report;
pub mod solver;

pub use error::Error;
pub use rat::Rat;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
