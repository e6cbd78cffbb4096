//! Weber location problem constrained to a closed convex set.
//!
//! The solver iterates the map `Q`: off the vertices it projects the
//! Vardi–Zhang modified Weiszfeld step onto the feasible region, and at a
//! feasible vertex it walks the segment towards the modified step as far as
//! feasibility allows. Around it sit
//!
//! * [`geometry`]: convex regions built from primitive constraints, with
//!   membership, Euclidean projection (Dykstra) and segment infima,
//! * [`weber`]: the objective and the vertex-aware iteration maps,
//! * [`solver`]: the iteration map `Q`, the starting rule and the main loop,
//! * [`certificates`]: runtime checks of the descent machinery at a point,
//! * [`baseline`]: independent grid and projected-subgradient minimizers,
//! * [`experiments`]: the nine-constraint planar benchmark and batch runner,
//! * [`cli`]: the `cweber` command line front end.

pub mod baseline;
pub mod certificates;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod numeric;
mod planar;
pub mod scenarios;
pub mod solver;
pub mod weber;

pub use error::{Error, Result};
pub use geometry::{Constraint, ConvexRegion, Poly2d, SmoothInequality};
pub use solver::{solve, SolveResult, SolverConfig, Status};
pub use weber::{VertexId, WeberInstance};

/// Dense real vector used for points throughout the crate.
pub type Point = nalgebra::DVector<f64>;
