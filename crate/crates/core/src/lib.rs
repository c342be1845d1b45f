//! Sub-Riemannian billiards in the Heisenberg group.
//!
//! The geometry is ℝ³ with the standard contact structure and the flat
//! metric pulled back from the plane. Geodesics project to circles and
//! lift planar area to height; billiard tables reflect them by a momentum
//! jump along the annihilator of the boundary. This crate provides the
//! exact cogeodesic flow, the reflection law with its degeneracies, an
//! event-driven evolution loop for five table families, constructive
//! solvers for the known periodic-orbit families, and the wavefront
//! analysis of the horizontal half-space.

pub mod dynamics;
pub mod geometry;
pub mod io;
pub mod num;
pub mod orbits;
pub mod reflection;
pub mod tables;
pub mod wavefront;

pub use dynamics::{
    caustic_tangency_count, min_z_on_arc, next_event, run, Event, RunParams, Termination,
    Trajectory,
};
pub use geometry::{
    apply_symmetry, connect, delta_z, flow, hamiltonian, projected_circle, Covector, GeodesicArc,
    GeomError, Point3, ProjectedPath, State, SymmetryElement,
};
pub use reflection::{
    is_self_reflecting, reflect, variational_reflection_oracle, ReflectionOutcome,
    VariationalCheck,
};
pub use tables::{BoundaryContact, Face, TableSpec};
