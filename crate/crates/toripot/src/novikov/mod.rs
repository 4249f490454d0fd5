//! The arithmetic kernel: coefficient scalars in two backends (exact rational
//! and complex float with an explicit zero tolerance) and truncated series
//! with rational exponents bounded below.

mod scalar;
mod series;

pub use scalar::{Scalar, ScalarMode};
pub use series::{NovikovSeries, Valuation};
