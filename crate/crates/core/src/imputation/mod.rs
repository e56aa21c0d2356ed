//! Imputation of the unknown rows `(A, b)`.
//!
//! Every result keeps all observations feasible, scales each row, and makes
//! the preferred observation optimal for `min c'x` over the assembled region
//! `{x : Ax ≥ b} ∩ S`, where `S` is the cost half-space `c'x ≥ c'x0` followed
//! by the known rows.

mod builder;
mod heuristics;
mod instance;
mod joint;
mod loss;
mod partition;
mod rowwise;

use serde::{Deserialize, Serialize};

use crate::forward::{verify_imputation, ForwardError, VerificationReport};
use crate::polyhedra::{
    half_space_of_cost, is_valid_set, ConstraintRow, GeometryError, Normalization, ObservationSet, Polyhedron,
};
use crate::solver::{SolveStatus, SolverError};

pub use instance::{ProblemInstance, SideConstraint};
pub use joint::default_big_m;
pub use loss::{Distance, LossSpec, Prior, DEFAULT_EPSILON};

use rowwise::{prior_row_usable, solve_row, RowObjective, RowSolution};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ImputeError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid loss: {0}")]
    InvalidLoss(String),
    #[error("side constraints leave no valid row{}", .row.map(|r| format!(" for row {r}")).unwrap_or_default())]
    InfeasibleImputation { row: Option<usize> },
    #[error("big-M {big_m} is too small: a switched-off slack reached {max_slack}; try big_m = {suggested}")]
    BigMTooSmall { big_m: f64, max_slack: f64, suggested: f64 },
    #[error("solver limit reached in {subproblem}")]
    SolverLimit { subproblem: String },
    #[error("unexpected solver status {status:?} in {subproblem}")]
    UnexpectedStatus { subproblem: String, status: SolveStatus },
    #[error("imputed region failed verification: {0:?}")]
    VerificationFailed(Box<VerificationReport>),
}

/// Where an imputed row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowSource {
    ClosedForm,
    Prior,
    RowSubproblem,
    /// Copy of an earlier row with an identical subproblem.
    Replicated,
    JointModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowDiagnostics {
    pub row: usize,
    pub source: RowSource,
    /// Sign of `Σ_j a_ij` for sum-scaled rows.
    pub sigma: Option<i8>,
    /// Objective of the row subproblem, when there is one.
    pub objective: Option<f64>,
    pub nodes: usize,
    pub iterations: usize,
}

/// Imputed rows together with the known set they are intersected with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputedRegion {
    pub imputed_rows: Vec<ConstraintRow>,
    pub known_set: Polyhedron,
    pub loss: String,
    pub loss_value: f64,
    /// One value per stage of a combined loss; a single entry otherwise.
    pub stage_values: Vec<f64>,
    pub diagnostics: Vec<RowDiagnostics>,
    pub verification: VerificationReport,
}

impl ImputedRegion {
    /// `S` followed by the imputed rows.
    pub fn region(&self) -> Polyhedron {
        assemble_region(&self.imputed_rows, &self.known_set)
    }

    /// Slack `d_ik` of every observation `k` (columns) in every imputed row `i`.
    pub fn slack_matrix(&self, obs: &ObservationSet) -> Vec<Vec<f64>> {
        self.imputed_rows
            .iter()
            .map(|r| obs.points.iter().map(|x| r.slack(x)).collect())
            .collect()
    }
}

/// How decomposable losses (adherence, adjacency) are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decomposition {
    /// One small problem per row and sign branch.
    #[default]
    PerRow,
    /// One model over all rows with sign binaries.
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ImputeOptions {
    pub decomposition: Decomposition,
}

/// `S`: the normalized cost half-space `c'x ≥ c'x0`, then the known rows.
pub fn build_known_set(
    c: &[f64],
    x0: &[f64],
    known: &Polyhedron,
    scheme: Normalization,
) -> Result<Polyhedron, GeometryError> {
    let mut rows = vec![half_space_of_cost(c, x0, scheme)?];
    rows.extend(known.rows.iter().cloned());
    Polyhedron::new(c.len(), rows)
}

/// `S` followed by `rows`.
pub fn assemble_region(rows: &[ConstraintRow], s: &Polyhedron) -> Polyhedron {
    let mut all = s.rows.clone();
    all.extend(rows.iter().cloned());
    Polyhedron { n: s.n, rows: all }
}

pub fn impute(p: &ProblemInstance, loss: &LossSpec) -> Result<ImputedRegion, ImputeError> {
    impute_with(p, loss, &ImputeOptions::default())
}

pub fn impute_with(p: &ProblemInstance, loss: &LossSpec, opts: &ImputeOptions) -> Result<ImputedRegion, ImputeError> {
    match loss {
        LossSpec::Indifference => impute_indifference(p),
        LossSpec::Adherence {
            prior,
            weights,
            distance,
        } => match opts.decomposition {
            Decomposition::PerRow => impute_adherence(p, prior, weights.as_deref(), *distance),
            Decomposition::Joint => joint_single(p, loss),
        },
        LossSpec::Adjacency => match opts.decomposition {
            Decomposition::PerRow => impute_adjacency(p),
            Decomposition::Joint => joint_single(p, loss),
        },
        LossSpec::Fairness => impute_fairness(p),
        LossSpec::Compactness { big_m } => impute_compactness(p, *big_m),
        LossSpec::Combined { sequence, epsilon } => impute_combined(p, sequence, *epsilon),
    }
}

/// Every row is the scaled cost half-space; no solver call.
pub fn impute_indifference(p: &ProblemInstance) -> Result<ImputedRegion, ImputeError> {
    let row = half_space_of_cost(&p.c, p.x0(), p.normalization)?;
    let rows = vec![row; p.m1];
    let diags = (0..p.m1)
        .map(|i| RowDiagnostics {
            row: i,
            source: RowSource::ClosedForm,
            sigma: sigma_of(&rows[i]),
            objective: None,
            nodes: 0,
            iterations: 0,
        })
        .collect();
    finalize(p, "indifference", rows, 0.0, vec![0.0], diags)
}

pub(crate) fn adherence_weights(
    p: &ProblemInstance,
    prior: &Prior,
    weights: Option<&[f64]>,
) -> Result<Vec<f64>, ImputeError> {
    if prior.a.len() != p.m1 || prior.b.len() != p.m1 {
        return Err(ImputeError::InvalidLoss(format!(
            "prior has {} rows and {} right-hand sides, expected m1 = {}",
            prior.a.len(),
            prior.b.len(),
            p.m1
        )));
    }
    if let Some(r) = prior.a.iter().find(|r| r.len() != p.n) {
        return Err(ImputeError::InvalidLoss(format!(
            "prior row has {} coefficients, expected n = {}",
            r.len(),
            p.n
        )));
    }
    let w = weights.map(<[f64]>::to_vec).unwrap_or_else(|| vec![1.0; p.m1]);
    if w.len() != p.m1 {
        return Err(ImputeError::InvalidLoss(format!("{} weights for m1 = {}", w.len(), p.m1)));
    }
    if w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(ImputeError::InvalidLoss("weights must be finite and nonnegative".into()));
    }
    Ok(w)
}

/// Row-by-row distance to a prior guess. A prior row that already contains
/// every observation and carries the active scale is returned unchanged.
pub fn impute_adherence(
    p: &ProblemInstance,
    prior: &Prior,
    weights: Option<&[f64]>,
    distance: Distance,
) -> Result<ImputedRegion, ImputeError> {
    let w = adherence_weights(p, prior, weights)?;
    let prior_rows = prior.rows();
    let mut solved: Vec<(usize, RowSolution)> = Vec::new();
    let mut rows = Vec::with_capacity(p.m1);
    let mut diags = Vec::with_capacity(p.m1);
    for (i, pr) in prior_rows.iter().enumerate() {
        let valid = p.obs.points.iter().all(|x| pr.slack(x) >= 0.0);
        if valid {
            if let Some(row) = prior_row_usable(p, i, pr) {
                diags.push(RowDiagnostics {
                    row: i,
                    source: RowSource::Prior,
                    sigma: sigma_of(&row),
                    objective: Some(0.0),
                    nodes: 0,
                    iterations: 0,
                });
                rows.push(row);
                continue;
            }
        }
        let same = solved.iter().find(|(j, _)| {
            prior_rows[*j] == *pr && w[*j] == w[i] && p.side_for(*j) == p.side_for(i)
        });
        if let Some((_, sol)) = same {
            diags.push(diag(i, sol, RowSource::Replicated));
            rows.push(sol.row.clone());
            continue;
        }
        let obj = match distance {
            Distance::L2 if w[i] > 0.0 => RowObjective::AdherenceL2 {
                prior: pr.clone(),
                weight: w[i],
            },
            _ => RowObjective::AdherenceL1 {
                prior: pr.clone(),
                weight: w[i],
            },
        };
        let sol = solve_row(p, i, &obj)?;
        diags.push(diag(i, &sol, RowSource::RowSubproblem));
        rows.push(sol.row.clone());
        solved.push((i, sol));
    }
    let loss_value = diags.iter().filter_map(|d| d.objective).sum();
    finish_rowwise(p, "adherence", rows, loss_value, diags)
}

/// Rows minimizing the total slack of all observations. Rows with the same
/// side constraints share one subproblem.
pub fn impute_adjacency(p: &ProblemInstance) -> Result<ImputedRegion, ImputeError> {
    let mut solved: Vec<(usize, RowSolution)> = Vec::new();
    let mut rows = Vec::with_capacity(p.m1);
    let mut diags = Vec::with_capacity(p.m1);
    for i in 0..p.m1 {
        if let Some((_, sol)) = solved.iter().find(|(j, _)| p.side_for(*j) == p.side_for(i)) {
            diags.push(diag(i, sol, RowSource::Replicated));
            rows.push(sol.row.clone());
            continue;
        }
        let sol = solve_row(p, i, &RowObjective::Adjacency)?;
        diags.push(diag(i, &sol, RowSource::RowSubproblem));
        rows.push(sol.row.clone());
        solved.push((i, sol));
    }
    let loss_value = diags.iter().filter_map(|d| d.objective).sum();
    finish_rowwise(p, "adjacency", rows, loss_value, diags)
}

/// Mean absolute deviation of the total slacks `d_k = Σ_i d_ik`.
pub fn impute_fairness(p: &ProblemInstance) -> Result<ImputedRegion, ImputeError> {
    joint_single(p, &LossSpec::Fairness)
}

/// Sum over observations of the slack in the nearest row.
pub fn impute_compactness(p: &ProblemInstance, big_m: Option<f64>) -> Result<ImputedRegion, ImputeError> {
    joint_single(p, &LossSpec::Compactness { big_m })
}

/// Losses in sequence; each later stage keeps earlier values within `epsilon`.
pub fn impute_combined(p: &ProblemInstance, losses: &[LossSpec], epsilon: f64) -> Result<ImputedRegion, ImputeError> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(ImputeError::InvalidLoss(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    let out = joint::solve_joint(p, losses, epsilon)?;
    let names: Vec<&str> = losses.iter().map(LossSpec::name).collect();
    let value = out.stage_values.last().copied().unwrap_or(0.0);
    let diags = joint_diags(&out.rows, out.nodes, out.iterations);
    finalize(p, &format!("combined[{}]", names.join(",")), out.rows, value, out.stage_values, diags)
}

fn joint_single(p: &ProblemInstance, loss: &LossSpec) -> Result<ImputedRegion, ImputeError> {
    let out = joint::solve_joint(p, std::slice::from_ref(loss), 0.0)?;
    let value = out.stage_values[0];
    let diags = joint_diags(&out.rows, out.nodes, out.iterations);
    finalize(p, loss.name(), out.rows, value, out.stage_values, diags)
}

fn joint_diags(rows: &[ConstraintRow], nodes: usize, iterations: usize) -> Vec<RowDiagnostics> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| RowDiagnostics {
            row: i,
            source: RowSource::JointModel,
            sigma: sigma_of(r),
            objective: None,
            nodes,
            iterations,
        })
        .collect()
}

fn diag(i: usize, sol: &RowSolution, source: RowSource) -> RowDiagnostics {
    RowDiagnostics {
        row: i,
        source,
        sigma: sol.sigma.or_else(|| sigma_of(&sol.row)),
        objective: Some(sol.objective),
        nodes: sol.nodes,
        iterations: sol.iterations,
    }
}

fn sigma_of(r: &ConstraintRow) -> Option<i8> {
    match r.tag {
        crate::polyhedra::NormalizationTag::SumProxy { sigma } => Some(sigma),
        _ => None,
    }
}

fn finish_rowwise(
    p: &ProblemInstance,
    name: &str,
    rows: Vec<ConstraintRow>,
    loss_value: f64,
    diags: Vec<RowDiagnostics>,
) -> Result<ImputedRegion, ImputeError> {
    finalize(p, name, rows, loss_value, vec![loss_value], diags)
}

fn finalize(
    p: &ProblemInstance,
    name: &str,
    rows: Vec<ConstraintRow>,
    loss_value: f64,
    stage_values: Vec<f64>,
    diagnostics: Vec<RowDiagnostics>,
) -> Result<ImputedRegion, ImputeError> {
    let known_set = build_known_set(&p.c, p.x0(), &p.known, p.normalization)?;
    let region = assemble_region(&rows, &known_set);
    let verification = verify_imputation(&region, &p.obs, &p.c)?;
    if !verification.all_ok() {
        let rep = is_valid_set(&region, &p.obs)?;
        log::error!("verification failed: {:?}; violations {:?}", verification, rep.violations);
        return Err(ImputeError::VerificationFailed(Box::new(verification)));
    }
    Ok(ImputedRegion {
        imputed_rows: rows,
        known_set,
        loss: name.to_string(),
        loss_value,
        stage_values,
        diagnostics,
        verification,
    })
}
