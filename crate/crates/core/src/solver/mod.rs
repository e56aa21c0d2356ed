//! Dense solvers for the small linear, mixed-binary and quadratic programs
//! built by the imputation routines.
//!
//! * [`solve_lp`]: two-phase primal simplex on a dense tableau.
//! * [`solve_milp`]: best-first branch and bound over LP relaxations.
//! * [`solve_qp_activeset`]: active-set enumeration for small convex
//!   diagonal QPs.

pub(crate) mod dense;
mod lp;
mod milp;
pub mod model;
mod qp;

pub use lp::{dual_objective, solve_lp, solve_lp_with, LpOptions};
pub use milp::{solve_milp, solve_milp_with, MilpOptions, NODE_LIMIT_ENV};
pub use model::{Relation, Row, SolveStatus, SolverModel, SolverResult, VarBounds};
pub use qp::{solve_qp_activeset, QP_MAX_INEQUALITIES, QP_MAX_VARS};

/// Rows and bounds count as satisfied within this slack.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// A binary value within this distance of 0 or 1 counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Objective values closer than this are treated as equal.
pub const OPTIMALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("solver not applicable: {0}")]
    NotApplicable(String),
}

/// Routes a model to the matching engine: QP if it has quadratic terms,
/// MILP if any variable is integral, LP otherwise.
pub fn solve(model: &SolverModel) -> Result<SolverResult, SolverError> {
    if model.has_quadratic() {
        solve_qp_activeset(model)
    } else if model.has_integrality() {
        solve_milp(model)
    } else {
        solve_lp(model)
    }
}
