//! Single-row subproblems: one LP per sign branch under the sum scale, one
//! MILP (or one QP per sign pattern) under the exact L1 scale.

use crate::polyhedra::{ConstraintRow, Normalization, NormalizationTag};
use crate::solver::{self, Relation, Row, SolveStatus, SolverModel, SolverResult};

use super::builder::{exact_scale, BlockSpec, Builder, Expr, Sign};
use super::instance::ProblemInstance;
use super::ImputeError;

#[derive(Debug, Clone)]
pub(crate) enum RowObjective {
    Adjacency,
    AdherenceL1 { prior: ConstraintRow, weight: f64 },
    AdherenceL2 { prior: ConstraintRow, weight: f64 },
    /// Slack `a'x^k − b` of observation `k`.
    Slack { k: usize },
}

#[derive(Debug, Clone)]
pub(crate) struct RowSolution {
    pub row: ConstraintRow,
    pub objective: f64,
    pub sigma: Option<i8>,
    pub iterations: usize,
    pub nodes: usize,
}

pub(crate) fn set_objective(model: &mut SolverModel, expr: &Expr) {
    model.objective.iter_mut().for_each(|c| *c = 0.0);
    model.objective_offset = expr.constant;
    for &(j, v) in &expr.terms {
        model.objective[j] += v;
    }
}

fn better(cand: f64, best: f64) -> bool {
    cand < best - 1e-9 * (1.0 + best.abs())
}

fn check_status(res: &SolverResult, what: &str) -> Result<bool, ImputeError> {
    match res.status {
        SolveStatus::Optimal => Ok(true),
        SolveStatus::Infeasible => Ok(false),
        SolveStatus::IterationLimit => Err(ImputeError::SolverLimit {
            subproblem: what.to_string(),
        }),
        SolveStatus::Unbounded => Err(ImputeError::UnexpectedStatus {
            subproblem: what.to_string(),
            status: res.status,
        }),
    }
}

/// Optimal single row for instance row `row` (its side constraints apply).
pub(crate) fn solve_row(p: &ProblemInstance, row: usize, obj: &RowObjective) -> Result<RowSolution, ImputeError> {
    let what = format!("row {row} subproblem");
    match (p.normalization, obj) {
        (Normalization::SumProxy, _) => {
            let mut best: Option<RowSolution> = None;
            let mut iterations = 0;
            for sigma in [1i8, -1] {
                let mut b = Builder::new(p, row, 1, Sign::Fixed(sigma));
                let res = match obj {
                    RowObjective::AdherenceL2 { prior, weight } => {
                        add_l2_objective(&mut b.model, &b.rows[0].a, b.rows[0].b, prior, *weight);
                        solver::solve_qp_activeset(&b.model)?
                    }
                    _ => {
                        let expr = b.add_block(block_for(obj));
                        set_objective(&mut b.model, &expr);
                        solver::solve_lp(&b.model)?
                    }
                };
                iterations += res.iterations;
                if !check_status(&res, &what)? {
                    continue;
                }
                let mut x = res.solution.clone().unwrap_or_default();
                let value = res.objective_value.unwrap_or(f64::INFINITY);
                if best.as_ref().is_none_or(|s| better(value, s.objective)) {
                    if matches!(obj, RowObjective::Adjacency | RowObjective::AdherenceL1 { .. }) {
                        let (refined, iters) = lex_refine(&mut b, x, value);
                        x = refined;
                        iterations += iters;
                    }
                    best = Some(RowSolution {
                        row: b.extract_rows(&x).remove(0),
                        objective: value,
                        sigma: Some(sigma),
                        iterations: 0,
                        nodes: 0,
                    });
                }
            }
            finish(best, iterations, 0, row, obj)
        }
        (Normalization::L1Exact, RowObjective::AdherenceL2 { prior, weight }) => l1_exact_l2(p, row, prior, *weight),
        (Normalization::L1Exact, _) => {
            let mut b = Builder::new(p, row, 1, Sign::Binary);
            let expr = b.add_block(block_for(obj));
            set_objective(&mut b.model, &expr);
            let res = solver::solve_milp(&b.model)?;
            let best = if check_status(&res, &what)? {
                let x = res.solution.as_deref().unwrap_or_default();
                Some(RowSolution {
                    row: b.extract_rows(x).remove(0),
                    objective: res.objective_value.unwrap_or(f64::INFINITY),
                    sigma: None,
                    iterations: 0,
                    nodes: 0,
                })
            } else {
                None
            };
            finish(best, res.iterations, res.node_count, row, obj)
        }
    }
}

/// Among optimal rows, picks the lexicographically smallest coefficient
/// vector: each `a_j` in turn is minimized with the objective held at
/// `value` and the earlier coefficients fixed. Stops at the first step that
/// is unbounded or fails.
fn lex_refine(b: &mut Builder, mut x: Vec<f64>, value: f64) -> (Vec<f64>, usize) {
    let mut iterations = 0;
    let obj: Vec<(usize, f64)> = b
        .model
        .objective
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, &v)| (j, v))
        .collect();
    let limit = value - b.model.objective_offset;
    b.model.add_row(Row::new(obj, Relation::Le, limit));
    let a = b.rows[0].a.clone();
    for &j in &a {
        b.model.objective.iter_mut().for_each(|c| *c = 0.0);
        b.model.objective_offset = 0.0;
        b.model.objective[j] = 1.0;
        let Ok(res) = solver::solve_lp(&b.model) else { break };
        iterations += res.iterations;
        match (res.status, res.solution, res.objective_value) {
            (SolveStatus::Optimal, Some(sol), Some(v)) => {
                x = sol;
                b.model.add_row(Row::new(vec![(j, 1.0)], Relation::Le, v));
            }
            _ => break,
        }
    }
    (x, iterations)
}

fn finish(
    best: Option<RowSolution>,
    iterations: usize,
    nodes: usize,
    row: usize,
    obj: &RowObjective,
) -> Result<RowSolution, ImputeError> {
    let mut s = best.ok_or(ImputeError::InfeasibleImputation { row: Some(row) })?;
    s.iterations = iterations;
    s.nodes = nodes;
    if let RowObjective::AdherenceL2 { weight, .. } = obj {
        // The QP minimizes w·‖Δ‖²; the loss is w·‖Δ‖ = sqrt(w · w‖Δ‖²).
        s.objective = (weight * s.objective.max(0.0)).sqrt();
    }
    Ok(s)
}

fn block_for(obj: &RowObjective) -> BlockSpec {
    match obj {
        RowObjective::Adjacency => BlockSpec::Adjacency,
        RowObjective::AdherenceL1 { prior, weight } => BlockSpec::AdherenceL1 {
            prior: vec![prior.clone()],
            weights: vec![*weight],
        },
        RowObjective::Slack { k } => BlockSpec::Slack { k: *k },
        RowObjective::AdherenceL2 { .. } => unreachable!("L2 adherence is handled as a QP"),
    }
}

/// `weight · (‖a − â‖² + (b − b̂)²)` on the row variables.
fn add_l2_objective(model: &mut SolverModel, a: &[usize], b: usize, prior: &ConstraintRow, weight: f64) {
    let mut offset = 0.0;
    for (&j, &t) in a.iter().zip(&prior.a) {
        model.set_quadratic(j, weight);
        model.objective[j] = -2.0 * weight * t;
        offset += weight * t * t;
    }
    model.set_quadratic(b, weight);
    model.objective[b] = -2.0 * weight * prior.b;
    offset += weight * prior.b * prior.b;
    model.objective_offset = offset;
}

/// L2 adherence under the exact L1 scale: one QP per orthant, where the scale
/// becomes the linear equality `Σ_j s_j a_j = 1`.
fn l1_exact_l2(p: &ProblemInstance, row: usize, prior: &ConstraintRow, weight: f64) -> Result<RowSolution, ImputeError> {
    let n = p.n;
    let mut best: Option<RowSolution> = None;
    let mut iterations = 0;
    for pattern in 0u32..(1u32 << n) {
        let signs: Vec<f64> = (0..n).map(|j| if pattern >> j & 1 == 0 { 1.0 } else { -1.0 }).collect();
        let mut model = SolverModel::with_free_vars(n + 1);
        let (a, b): (Vec<usize>, usize) = ((0..n).collect(), n);
        for x in &p.obs.points {
            let mut t: Vec<(usize, f64)> = x.iter().enumerate().map(|(j, &v)| (j, v)).collect();
            t.push((b, -1.0));
            model.add_row(Row::new(t, Relation::Ge, 0.0));
        }
        for sc in p.side_for(row) {
            let mut t: Vec<(usize, f64)> = sc.coeffs.iter().enumerate().map(|(j, &v)| (j, v)).collect();
            t.push((b, sc.b_coeff));
            model.add_row(Row::new(t, sc.relation, sc.rhs));
        }
        for (j, &s) in signs.iter().enumerate() {
            model.add_row(Row::new(vec![(j, s)], Relation::Ge, 0.0));
        }
        model.add_row(Row::new(signs.iter().enumerate().map(|(j, &s)| (j, s)).collect(), Relation::Eq, 1.0));
        add_l2_objective(&mut model, &a, b, prior, weight);
        let res = solver::solve_qp_activeset(&model)?;
        iterations += res.iterations;
        if res.status != SolveStatus::Optimal {
            continue;
        }
        let x = res.solution.unwrap_or_default();
        let value = res.objective_value.unwrap_or(f64::INFINITY);
        if best.as_ref().is_none_or(|s| better(value, s.objective)) {
            best = Some(RowSolution {
                row: exact_scale(x[..n].to_vec(), x[n], Normalization::L1Exact),
                objective: value,
                sigma: None,
                iterations: 0,
                nodes: 0,
            });
        }
    }
    finish(best, iterations, 0, row, &RowObjective::AdherenceL2 { prior: prior.clone(), weight })
}

/// `δ_k`: the smallest slack observation `k` can have in any valid scaled
/// row. Lower bound for the nearest-row distance of `k`.
pub(crate) fn slack_floors(p: &ProblemInstance) -> Result<Vec<f64>, ImputeError> {
    let mut free = p.clone();
    free.side_constraints.clear();
    (0..p.k())
        .map(|k| solve_row(&free, 0, &RowObjective::Slack { k }).map(|s| s.objective.max(0.0)))
        .collect()
}

/// Whether a prior row may be returned unchanged: it has the active scale
/// (up to rounding) and fits the side constraints of its row.
pub(crate) fn prior_row_usable(p: &ProblemInstance, row: usize, prior: &ConstraintRow) -> Option<ConstraintRow> {
    let scaled = match p.normalization {
        Normalization::SumProxy => {
            let s: f64 = prior.a.iter().sum();
            if (s.abs() - 1.0).abs() > 1e-12 {
                return None;
            }
            ConstraintRow {
                a: prior.a.clone(),
                b: prior.b,
                tag: NormalizationTag::SumProxy {
                    sigma: if s > 0.0 { 1 } else { -1 },
                },
            }
        }
        Normalization::L1Exact => {
            let l1: f64 = prior.a.iter().map(|v| v.abs()).sum();
            if (l1 - 1.0).abs() > 1e-12 {
                return None;
            }
            ConstraintRow {
                a: prior.a.clone(),
                b: prior.b,
                tag: NormalizationTag::L1Exact,
            }
        }
    };
    let fits = p.side_for(row).iter().all(|sc| {
        let lhs: f64 = sc.coeffs.iter().zip(&prior.a).map(|(c, a)| c * a).sum::<f64>() + sc.b_coeff * prior.b;
        match sc.relation {
            Relation::Ge => lhs >= sc.rhs - 1e-9,
            Relation::Le => lhs <= sc.rhs + 1e-9,
            Relation::Eq => (lhs - sc.rhs).abs() <= 1e-9,
        }
    });
    fits.then_some(scaled)
}
