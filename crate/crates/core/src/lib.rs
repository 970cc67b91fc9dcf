//! Numerical construction of compact embedded constant mean curvature
//! hypersurfaces with `O(n) x O(n)` symmetry in `S^(2n)` and
//! `O(n) x O(n) x O(n)` symmetry in `S^(3n-1)`.
//!
//! The hypersurfaces are generated by closed curves in a two-dimensional
//! orbit space. A generating curve is found by shooting from the mirror
//! `theta = pi/4`, bisecting on the initial radius until the trajectory
//! meets a second mirror orthogonally, and then reflecting the arc.

pub mod assembly;
pub mod dynamics;
pub mod geometry;
pub mod ode;
pub mod shooting;
pub mod verify;

pub use dynamics::{Params, ShootingState};
pub use geometry::{Family, FamilyKind, OrbitPoint};
