use serde::{Deserialize, Serialize};

use crate::polyhedra::{is_valid_set, GeometryError, Normalization, ObservationSet, Polyhedron};
use crate::solver::Relation;

use super::ImputeError;

/// Extra linear restriction on the coefficients of imputed rows:
/// `coeffs · a_i + b_coeff · b_i (relation) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideConstraint {
    /// Rows the restriction applies to; `None` means every imputed row.
    #[serde(default)]
    pub rows: Option<Vec<usize>>,
    pub coeffs: Vec<f64>,
    #[serde(default)]
    pub b_coeff: f64,
    pub relation: Relation,
    pub rhs: f64,
}

impl SideConstraint {
    /// Fixes `b_i = value` for the listed rows.
    pub fn fix_rhs(rows: Option<Vec<usize>>, n: usize, value: f64) -> Self {
        SideConstraint {
            rows,
            coeffs: vec![0.0; n],
            b_coeff: 1.0,
            relation: Relation::Eq,
            rhs: value,
        }
    }

    pub fn applies_to(&self, row: usize) -> bool {
        self.rows.as_ref().is_none_or(|r| r.contains(&row))
    }
}

/// Cost vector, observations, known rows `Gx ≥ h` and the number of rows to
/// impute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub n: usize,
    pub c: Vec<f64>,
    pub obs: ObservationSet,
    pub known: Polyhedron,
    pub m1: usize,
    pub normalization: Normalization,
    #[serde(default)]
    pub side_constraints: Vec<SideConstraint>,
}

impl ProblemInstance {
    /// Validates the data: nonzero cost, matching dimensions, at least one
    /// observation and one unknown row, and known rows satisfied by every
    /// observation.
    pub fn new(
        c: Vec<f64>,
        points: Vec<Vec<f64>>,
        known: Polyhedron,
        m1: usize,
        normalization: Normalization,
    ) -> Result<Self, ImputeError> {
        let n = c.len();
        if n == 0 {
            return Err(ImputeError::InvalidInstance("dimension n must be at least 1".into()));
        }
        if known.n != n {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                found: known.n,
            }
            .into());
        }
        known.check()?;
        if m1 == 0 {
            return Err(ImputeError::InvalidInstance("m1 must be at least 1".into()));
        }
        let obs = ObservationSet::new(points, &c)?;
        let report = is_valid_set(&known, &obs)?;
        if let Some(v) = report.violations.first() {
            return Err(ImputeError::InvalidInstance(format!(
                "known row {} is violated by observation {} (by {:.3e}); the known set must contain every observation",
                v.row, v.observation, v.amount
            )));
        }
        Ok(ProblemInstance {
            n,
            c,
            obs,
            known,
            m1,
            normalization,
            side_constraints: Vec::new(),
        })
    }

    pub fn with_side_constraints(mut self, side: Vec<SideConstraint>) -> Result<Self, ImputeError> {
        for (i, s) in side.iter().enumerate() {
            if s.coeffs.len() != self.n {
                return Err(ImputeError::InvalidInstance(format!(
                    "side constraint {i} has {} coefficients for n = {}",
                    s.coeffs.len(),
                    self.n
                )));
            }
            if let Some(rows) = &s.rows {
                if let Some(r) = rows.iter().find(|&&r| r >= self.m1) {
                    return Err(ImputeError::InvalidInstance(format!(
                        "side constraint {i} names row {r} but m1 = {}",
                        self.m1
                    )));
                }
            }
            if !s.rhs.is_finite() || !s.b_coeff.is_finite() || s.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(ImputeError::InvalidInstance(format!("side constraint {i} has non-finite data")));
            }
        }
        self.side_constraints = side;
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.obs.len()
    }

    pub fn x0(&self) -> &[f64] {
        self.obs.preferred()
    }

    /// Side constraints that apply to imputed row `row`.
    pub fn side_for(&self, row: usize) -> Vec<&SideConstraint> {
        self.side_constraints.iter().filter(|s| s.applies_to(row)).collect()
    }
}
