//! Critical points of potentials over the truncated series field: leading
//! polynomial systems, Newton lifting of their zeros to series solutions,
//! refinement of positive-dimensional components, and whole-fiber profiles.

mod leading;
mod lift;
pub mod poly;
mod profile;

pub use leading::{leading_system, solve_leading, LeadingSolutions, LeadingTermSystem, SolutionFamily};
pub use lift::{lift_point, refine_family, FamilyRefinement, LiftedPoint};
pub use profile::{
    bulk_profile, critical_profile, find_balanced, potential_profile, sweep_family,
    BalancedReport, CriticalPoint, CriticalProfile, FamilyReport, RhoSpec, SegmentReport,
};
