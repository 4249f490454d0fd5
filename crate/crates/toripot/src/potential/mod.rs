//! Toric potential functions: affine energies, term multisets, moment-
//! polytope models with a built-in registry, bulk deformation, and the model
//! file format.

pub mod affine;
pub mod model;
pub mod parse;
pub mod term;

pub use affine::{AffineExpr, Var};
pub use model::{Facet, ToricModel, REGISTRY_NAMES};
pub use parse::parse_model;
pub use term::{Potential, PotentialTerm};
