//! Adaptive modified weak Galerkin finite elements for 2D linear elasticity.
//!
//! The pieces follow the adaptive loop: [`mesh`] holds the triangulation and
//! newest-vertex bisection, [`wg_space`] and [`weak_ops`] define the discrete
//! space and its weak derivatives, [`system`] assembles and solves, and
//! [`estimator`] and [`adaptivity`] drive refinement. [`problems`] carries the
//! benchmark data and [`cli`] the command-line front end.

pub mod adaptivity;
pub mod cli;
pub mod estimator;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod system;
pub mod weak_ops;
pub mod wg_space;

pub use adaptivity::{amwg_loop, amwg_loop_with, mark_dorfler, AdaptConfig, AdaptRecord};
pub use estimator::{estimate, ErrorIndicators};
pub use mesh::{bisect, Domain, Mesh};
pub use problems::{make_problem, BenchmarkId, ProblemSpec};
pub use system::{assemble, energy_error, solve_spd, SparseSymSystem};
pub use wg_space::{DofLayout, SpaceOrder, WgFunction};
