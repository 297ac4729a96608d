//! Lower bounds on the spectrum of two-dimensional Schrödinger operators with
//! δ-interactions supported on stars of rays, and a finite-difference
//! pipeline that checks them numerically.
//!
//! - [`geometry`]: ray stars and their wedge decomposition.
//! - [`analytic_bounds`]: closed-form bounds and the coupling-split optimizer.
//! - [`discretization`]: 5-point stiffness plus a quadrature trace term on a
//!   Dirichlet box.
//! - [`eigensolver`]: shift-invert Lanczos for the lowest eigenvalues and
//!   inertia counts.

pub mod analytic_bounds;
pub mod discretization;
pub mod eigensolver;
pub mod geometry;
pub mod sparse;

pub use analytic_bounds::{
    angle_bound, brute_force_star_bound, lines_bound, llp_bound, star_bound, wedge_lower_bound,
    BoundError, BoundResult, SplitSolution,
};
pub use discretization::{assemble, build_grid, DiscreteForm, Grid};
pub use eigensolver::{
    count_below, count_below_with, lowest_eigenpairs, lowest_eigenpairs_with, SolverError,
    SolverOptions, SpectrumEstimate,
};
pub use geometry::{angle_config, lines_config, wedges_of, Ray, RayConfig, WedgeDecomposition};
