//! Pareto-front reconstruction for the mean-variance-skewness-kurtosis
//! portfolio problem.
//!
//! Each of the four objectives (mean, variance, skewness, kurtosis of the
//! portfolio return) is estimated from a returns table; linear
//! scalarizations `F_λ = -λ₁f₁ + λ₂f₂ - λ₃f₃ + λ₄f₄` are minimized over the
//! simplex or a cube with FISTA, and a grid over `λ` traces the front.

pub mod convexity;
pub mod error;
pub mod moments;
pub mod objective;
pub mod projection;
pub mod report;
pub mod returns;
pub mod solver;
pub mod sparse;
pub mod sweep;
pub mod synth;

pub use convexity::{classify_lambda, region_volume, RegionLabel, RegionTarget};
pub use error::{MvskError, Result};
pub use moments::{build_moment_model, ModelBounds, MomentModel};
pub use objective::{eval_objectives, eval_scalarized, gradient, hessian, psi, LambdaPoint, ObjectiveValues};
pub use projection::{project_cube, project_face, project_simplex, Domain};
pub use returns::{load_returns, Bounds, DomainKind, ReturnsMatrix};
pub use solver::{scalarized_reference, solve, SolveResult, SolverOptions};
pub use sparse::{enumerate_candidates, solve_sparse, SparseOptions};
pub use sweep::{
    build_grid, non_domination_check, run_sweep, scale_values, superior_set, support_histogram, LambdaGrid,
    SweepOptions, SweepResult,
};
