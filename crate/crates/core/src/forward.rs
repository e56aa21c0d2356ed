//! The forward LP `min c'x` over a region, and the checks that an imputed
//! region keeps every observation feasible and the preferred one optimal.

use serde::{Deserialize, Serialize};

use crate::polyhedra::{dot, is_valid_set, GeometryError, ObservationSet, Polyhedron};
use crate::solver::{self, SolveStatus, SolverError, SolverModel, SolverResult, OPTIMALITY_TOL};

/// Normalized rows must match their scale to this precision.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForwardError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("radius must be nonnegative, got {0}")]
    NegativeRadius(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardProblem {
    pub c: Vec<f64>,
    pub region: Polyhedron,
}

impl ForwardProblem {
    pub fn new(c: Vec<f64>, region: Polyhedron) -> Result<Self, ForwardError> {
        if c.iter().all(|&v| v == 0.0) {
            return Err(GeometryError::ZeroCost.into());
        }
        if c.len() != region.n {
            return Err(GeometryError::DimensionMismatch {
                expected: region.n,
                found: c.len(),
            }
            .into());
        }
        region.check()?;
        Ok(ForwardProblem { c, region })
    }

    pub fn to_model(&self) -> SolverModel {
        let mut m = SolverModel::with_free_vars(self.region.n);
        m.objective = self.c.clone();
        for r in &self.region.rows {
            m.add_row(r.to_solver_row());
        }
        m
    }
}

/// Solves `min c'x s.t. every row of the region`; Infeasible and Unbounded
/// come back as statuses.
pub fn solve_forward(fp: &ForwardProblem) -> Result<SolverResult, ForwardError> {
    Ok(solver::solve_lp(&fp.to_model())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub primal_feasible: bool,
    pub worst_violation: f64,
    pub x0_optimal: bool,
    pub normalization_ok: bool,
    pub forward_status: SolveStatus,
    pub forward_optimum: Option<f64>,
    pub preferred_value: f64,
    pub co_optimal_observations: Vec<usize>,
}

impl VerificationReport {
    pub fn all_ok(&self) -> bool {
        self.primal_feasible && self.x0_optimal && self.normalization_ok
    }
}

/// Checks feasibility of all observations, optimality of the preferred one and
/// the scale of every tagged row.
pub fn verify_imputation(
    region: &Polyhedron,
    obs: &ObservationSet,
    c: &[f64],
) -> Result<VerificationReport, ForwardError> {
    let validity = is_valid_set(region, obs)?;
    let fp = ForwardProblem::new(c.to_vec(), region.clone())?;
    let fwd = solve_forward(&fp)?;
    let preferred_value = dot(c, obs.preferred());
    let forward_optimum = fwd.objective_value;
    let x0_optimal = validity.valid
        && fwd.status == SolveStatus::Optimal
        && forward_optimum.is_some_and(|v| (v - preferred_value).abs() <= OPTIMALITY_TOL);
    let normalization_ok = region
        .rows
        .iter()
        .all(|r| r.normalization_error() <= NORMALIZATION_TOL);
    let co_optimal_observations = obs
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| (dot(c, p) - preferred_value).abs() <= OPTIMALITY_TOL)
        .map(|(k, _)| k)
        .collect();
    Ok(VerificationReport {
        primal_feasible: validity.valid,
        worst_violation: validity.worst_violation,
        x0_optimal,
        normalization_ok,
        forward_status: fwd.status,
        forward_optimum,
        preferred_value,
        co_optimal_observations,
    })
}

/// Dual multipliers that certify optimality of the preferred point: `y` over
/// imputed rows, `w` over known rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub y: Vec<f64>,
    pub w: Vec<f64>,
}

impl DualCertificate {
    /// Largest entry of `|A'y + G'w − c|` and `|b'y + h'w − c'x0|`, together
    /// with the result of the sign check `y, w ≥ 0`.
    pub fn residuals(&self, region: &Polyhedron, known_rows: usize, c: &[f64], x0: &[f64]) -> (f64, f64, bool) {
        let mut grad = vec![0.0; region.n];
        let mut rhs = 0.0;
        for (i, r) in region.rows.iter().enumerate() {
            let m = if i < known_rows { self.w[i] } else { self.y[i - known_rows] };
            rhs += m * r.b;
            for (g, a) in grad.iter_mut().zip(&r.a) {
                *g += m * a;
            }
        }
        let stat = grad
            .iter()
            .zip(c)
            .map(|(g, c)| (g - c).abs())
            .fold(0.0, f64::max);
        let nonneg = self.y.iter().chain(&self.w).all(|&v| v >= 0.0);
        (stat, (rhs - dot(c, x0)).abs(), nonneg)
    }
}

/// Certificate with all weight on the first known row, which must be the
/// cost half-space `g_1 = c/κ`. Then `w = (κ, 0, …, 0)` and `y = 0`.
pub fn reconstruct_duals(region: &Polyhedron, known_rows: usize, c: &[f64]) -> Result<DualCertificate, ForwardError> {
    if known_rows == 0 || known_rows > region.rows.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: region.rows.len(),
            found: known_rows,
        }
        .into());
    }
    let g1 = &region.rows[0].a;
    if g1.len() != c.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: g1.len(),
            found: c.len(),
        }
        .into());
    }
    let kappa = dot(c, g1) / dot(g1, g1);
    let mut w = vec![0.0; known_rows];
    w[0] = kappa;
    Ok(DualCertificate {
        y: vec![0.0; region.rows.len() - known_rows],
        w,
    })
}

/// Minimizer of `c'x` over the ∞-norm box of `radius` around `x0`.
pub fn robust_preferred_box(x0: &[f64], radius: f64, c: &[f64]) -> Result<Vec<f64>, ForwardError> {
    if !(radius >= 0.0) {
        return Err(ForwardError::NegativeRadius(radius));
    }
    if c.iter().all(|&v| v == 0.0) {
        return Err(GeometryError::ZeroCost.into());
    }
    if c.len() != x0.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: x0.len(),
            found: c.len(),
        }
        .into());
    }
    Ok(x0
        .iter()
        .zip(c)
        .map(|(&x, &cj)| {
            if cj > 0.0 {
                x - radius
            } else if cj < 0.0 {
                x + radius
            } else {
                x
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedra::{half_space_of_cost, ConstraintRow, Normalization};

    fn case_one_s() -> Polyhedron {
        let c_row = half_space_of_cost(&[-1.0, -1.0], &[2.0, 2.0], Normalization::SumProxy).unwrap();
        Polyhedron::new(2, vec![c_row, ConstraintRow::new(vec![1.0, 1.0], 1.0)]).unwrap()
    }

    fn case_one_obs() -> ObservationSet {
        let pts = vec![
            vec![2.0, 2.0],
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![2.0, 1.0],
            vec![1.5, 1.5],
        ];
        ObservationSet::new(pts, &[-1.0, -1.0]).unwrap()
    }

    #[test]
    fn forward_over_known_set() {
        let fp = ForwardProblem::new(vec![-1.0, -1.0], case_one_s()).unwrap();
        let r = solve_forward(&fp).unwrap();
        let x = r.solution.unwrap();
        assert!((r.objective_value.unwrap() + 4.0).abs() < 1e-9);
        assert!((x[0] + x[1] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn forward_single_half_space() {
        let row = half_space_of_cost(&[1.0, 1.0], &[1.0, 1.0], Normalization::SumProxy).unwrap();
        let fp = ForwardProblem::new(vec![1.0, 1.0], Polyhedron::new(2, vec![row]).unwrap()).unwrap();
        assert!((solve_forward(&fp).unwrap().objective_value.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn forward_empty_region() {
        let p = Polyhedron::new(
            2,
            vec![ConstraintRow::new(vec![1.0, 0.0], 1.0), ConstraintRow::le(vec![1.0, 0.0], 0.0)],
        )
        .unwrap();
        let fp = ForwardProblem::new(vec![1.0, 0.0], p).unwrap();
        assert_eq!(solve_forward(&fp).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn verification_of_known_set() {
        let rep = verify_imputation(&case_one_s(), &case_one_obs(), &[-1.0, -1.0]).unwrap();
        assert!(rep.all_ok());
        assert_eq!(rep.co_optimal_observations, vec![0]);
        assert!((rep.forward_optimum.unwrap() + 4.0).abs() < 1e-9);
    }

    #[test]
    fn dominating_point_without_cost_row() {
        let mut pts = case_one_obs().points;
        pts.push(vec![3.0, 3.0]);
        let obs = ObservationSet {
            points: pts,
            preferred_index: 0,
        };
        let p = Polyhedron::new(2, vec![ConstraintRow::new(vec![1.0, 1.0], 1.0), ConstraintRow::le(vec![1.0, 0.0], 3.0), ConstraintRow::le(vec![0.0, 1.0], 3.0)]).unwrap();
        let rep = verify_imputation(&p, &obs, &[-1.0, -1.0]).unwrap();
        assert!(rep.primal_feasible);
        assert!(!rep.x0_optimal);
    }

    #[test]
    fn duals_on_case_one() {
        let s = case_one_s();
        let cert = reconstruct_duals(&s, 2, &[-1.0, -1.0]).unwrap();
        assert_eq!(cert.w, vec![2.0, 0.0]);
        assert!(cert.y.is_empty());
        let (stat, obj, nonneg) = cert.residuals(&s, 2, &[-1.0, -1.0], &[2.0, 2.0]);
        assert!(stat < 1e-15 && obj < 1e-15 && nonneg);
    }

    #[test]
    fn robust_box_examples() {
        assert_eq!(robust_preferred_box(&[2.0, 2.0], 0.5, &[-1.0, -1.0]).unwrap(), vec![2.5, 2.5]);
        assert_eq!(robust_preferred_box(&[2.0, 2.0], 0.0, &[-1.0, -1.0]).unwrap(), vec![2.0, 2.0]);
        assert_eq!(robust_preferred_box(&[1.0, 1.0], 0.25, &[1.0, 0.0]).unwrap(), vec![0.75, 1.0]);
        assert!(matches!(
            robust_preferred_box(&[1.0], -1.0, &[1.0]),
            Err(ForwardError::NegativeRadius(_))
        ));
    }
}
