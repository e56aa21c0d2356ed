use serde::{Deserialize, Serialize};

use super::SolverError;

/// Sense of a linear row `terms · x  (relation)  rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

/// A sparse linear row. Terms may repeat an index; repeated coefficients add up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn new(terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        Row { terms, relation, rhs }
    }

    /// Builds a row from a dense coefficient slice, dropping exact zeros.
    pub fn from_dense(coeffs: &[f64], relation: Relation, rhs: f64) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .collect();
        Row { terms, relation, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, v)| v * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Box bounds of one variable; infinities mark a free side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarBounds {
    #[serde(with = "lower_inf")]
    pub lower: f64,
    #[serde(with = "upper_inf")]
    pub upper: f64,
}

impl VarBounds {
    pub const FREE: VarBounds = VarBounds {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };
    pub const NONNEG: VarBounds = VarBounds {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    pub const BINARY: VarBounds = VarBounds {
        lower: 0.0,
        upper: 1.0,
    };

    pub fn new(lower: f64, upper: f64) -> Self {
        VarBounds { lower, upper }
    }
}

/// A linear, mixed-binary or diagonal-quadratic program in minimization form:
///
/// ```text
/// minimize    offset + objective · x + Σ_j quadratic_diag[j] · x_j²
/// subject to  rows, bounds, x_j ∈ {0, 1} where integrality[j]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverModel {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    #[serde(default)]
    pub objective_offset: f64,
    #[serde(default)]
    pub quadratic_diag: Option<Vec<f64>>,
    pub rows: Vec<Row>,
    pub bounds: Vec<VarBounds>,
    pub integrality: Vec<bool>,
}

impl Default for SolverModel {
    fn default() -> Self {
        SolverModel::new()
    }
}

impl SolverModel {
    pub fn new() -> Self {
        SolverModel {
            num_vars: 0,
            objective: Vec::new(),
            objective_offset: 0.0,
            quadratic_diag: None,
            rows: Vec::new(),
            bounds: Vec::new(),
            integrality: Vec::new(),
        }
    }

    /// Model with `num_vars` free continuous variables and a zero objective.
    pub fn with_free_vars(num_vars: usize) -> Self {
        let mut m = SolverModel::new();
        for _ in 0..num_vars {
            m.add_var(VarBounds::FREE, 0.0, false);
        }
        m
    }

    pub fn add_var(&mut self, bounds: VarBounds, cost: f64, integral: bool) -> usize {
        let idx = self.num_vars;
        self.num_vars += 1;
        self.objective.push(cost);
        self.bounds.push(bounds);
        self.integrality.push(integral);
        if let Some(q) = self.quadratic_diag.as_mut() {
            q.push(0.0);
        }
        idx
    }

    pub fn add_binary(&mut self, cost: f64) -> usize {
        self.add_var(VarBounds::BINARY, cost, true)
    }

    pub fn add_row(&mut self, row: Row) -> usize {
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn set_quadratic(&mut self, var: usize, coeff: f64) {
        let n = self.num_vars;
        let q = self.quadratic_diag.get_or_insert_with(|| vec![0.0; n]);
        q[var] = coeff;
    }

    pub fn has_integrality(&self) -> bool {
        self.integrality.iter().any(|&b| b)
    }

    pub fn has_quadratic(&self) -> bool {
        self.quadratic_diag
            .as_ref()
            .is_some_and(|q| q.iter().any(|&v| v != 0.0))
    }

    /// Objective value of `x`, including the offset and the quadratic part.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut v = self.objective_offset;
        for (c, xi) in self.objective.iter().zip(x) {
            v += c * xi;
        }
        if let Some(q) = &self.quadratic_diag {
            for (qj, xj) in q.iter().zip(x) {
                v += qj * xj * xj;
            }
        }
        v
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .rows
            .iter()
            .map(|r| r.violation(x))
            .fold(0.0_f64, f64::max);
        let bounds = self
            .bounds
            .iter()
            .zip(x)
            .map(|(b, &v)| (b.lower - v).max(v - b.upper).max(0.0))
            .fold(0.0_f64, f64::max);
        rows.max(bounds)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.num_vars;
        if self.objective.len() != n || self.bounds.len() != n || self.integrality.len() != n {
            return Err(SolverError::DimensionMismatch(format!(
                "num_vars = {n} but objective/bounds/integrality have lengths {}/{}/{}",
                self.objective.len(),
                self.bounds.len(),
                self.integrality.len()
            )));
        }
        if let Some(q) = &self.quadratic_diag {
            if q.len() != n {
                return Err(SolverError::DimensionMismatch(format!(
                    "quadratic_diag has length {} for {n} variables",
                    q.len()
                )));
            }
            if let Some(j) = q.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(SolverError::InvalidModel(format!(
                    "quadratic_diag[{j}] = {} is not a finite nonnegative value",
                    q[j]
                )));
            }
        }
        if let Some(j) = self.objective.iter().position(|v| !v.is_finite()) {
            return Err(SolverError::InvalidModel(format!(
                "objective[{j}] is not finite"
            )));
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(SolverError::InvalidModel(format!("row {r} has non-finite rhs")));
            }
            for &(j, v) in &row.terms {
                if j >= n {
                    return Err(SolverError::DimensionMismatch(format!(
                        "row {r} references variable {j} of {n}"
                    )));
                }
                if !v.is_finite() {
                    return Err(SolverError::InvalidModel(format!(
                        "row {r} has a non-finite coefficient on variable {j}"
                    )));
                }
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if b.lower.is_nan() || b.upper.is_nan() || b.lower == f64::INFINITY || b.upper == f64::NEG_INFINITY {
                return Err(SolverError::InvalidModel(format!(
                    "variable {j} has invalid bounds [{}, {}]",
                    b.lower, b.upper
                )));
            }
            if self.integrality[j] && (b.lower < 0.0 || b.upper > 1.0) {
                return Err(SolverError::InvalidModel(format!(
                    "integral variable {j} must be binary, bounds are [{}, {}]",
                    b.lower, b.upper
                )));
            }
        }
        Ok(())
    }

    /// Pretty JSON dump for triage.
    pub fn to_debug_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub status: SolveStatus,
    pub solution: Option<Vec<f64>>,
    pub objective_value: Option<f64>,
    pub node_count: usize,
    pub iterations: usize,
    /// Row multipliers of an optimal LP, oriented so that for a minimization
    /// `≥` rows carry nonnegative and `≤` rows nonpositive values.
    #[serde(default)]
    pub duals: Option<Vec<f64>>,
}

impl SolverResult {
    pub(crate) fn without_solution(status: SolveStatus, iterations: usize) -> Self {
        SolverResult {
            status,
            solution: None,
            objective_value: None,
            node_count: 0,
            iterations,
            duals: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

mod lower_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

mod upper_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
