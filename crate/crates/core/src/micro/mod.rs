//! Microscopic origin of the model: three-level Rydberg atoms in a triangle.

pub mod dipole;
pub mod triangle;
pub mod wigner;

pub use dipole::{default_assignment, dipole_element, search_assignments, AngularState, Level, LevelAssignment};
pub use triangle::{adiabatic_eliminate, elimination_scan, loglog_slope, pair_interaction, triangle_model, TriangleSetup};
pub use wigner::{wigner3j, wigner6j, HalfInt, SignedSqrt};
