//! One model over all `m1` rows with sign binaries, solved stage by stage.

use crate::polyhedra::ConstraintRow;
use crate::solver::{self, MilpOptions, Relation, Row, SolveStatus, SolverModel, FEASIBILITY_TOL};

use super::builder::{BlockSpec, Builder, Expr, Sign};
use super::heuristics;
use super::partition;
use super::instance::ProblemInstance;
use super::loss::{Distance, LossSpec};
use super::rowwise::{set_objective, slack_floors};
use super::ImputeError;

pub(crate) struct JointOutcome {
    pub rows: Vec<ConstraintRow>,
    pub stage_values: Vec<f64>,
    pub nodes: usize,
    pub iterations: usize,
}

/// Default big-M: `10 · max_k ‖x^k‖₁ + 10`.
pub fn default_big_m(p: &ProblemInstance) -> f64 {
    let max_l1 = p
        .obs
        .points
        .iter()
        .map(|x| x.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    10.0 * max_l1 + 10.0
}

fn block_spec(p: &ProblemInstance, loss: &LossSpec, stage: usize) -> Result<BlockSpec, ImputeError> {
    Ok(match loss {
        LossSpec::Indifference => BlockSpec::Zero,
        LossSpec::Adjacency => BlockSpec::Adjacency,
        LossSpec::Fairness => BlockSpec::Fairness,
        LossSpec::Compactness { big_m } => {
            let m = big_m.unwrap_or_else(|| default_big_m(p));
            if !(m > 0.0) || !m.is_finite() {
                return Err(ImputeError::InvalidLoss(format!("big_m must be positive, got {m}")));
            }
            BlockSpec::Compactness {
                big_m: m,
                delta: slack_floors(p)?,
            }
        }
        LossSpec::Adherence {
            prior,
            weights,
            distance,
        } => {
            if *distance == Distance::L2 {
                return Err(ImputeError::InvalidLoss(format!(
                    "stage {stage}: L2 adherence has a quadratic objective and cannot be pinned; use distance \"l1\""
                )));
            }
            let weights = super::adherence_weights(p, prior, weights.as_deref())?;
            BlockSpec::AdherenceL1 {
                prior: prior.rows(),
                weights,
            }
        }
        LossSpec::Combined { .. } => {
            return Err(ImputeError::InvalidLoss("combined losses cannot be nested".into()));
        }
    })
}

fn pick_start(model: &SolverModel, candidates: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    candidates
        .into_iter()
        .filter(|x| model.max_violation(x) <= FEASIBILITY_TOL)
        .min_by(|x, y| model.evaluate(x).total_cmp(&model.evaluate(y)))
}

/// Solves `stages` in order over one joint model. After each stage its
/// objective is kept within `epsilon` of the optimum found.
pub(crate) fn solve_joint(p: &ProblemInstance, stages: &[LossSpec], epsilon: f64) -> Result<JointOutcome, ImputeError> {
    if stages.is_empty() {
        return Err(ImputeError::InvalidLoss("empty loss sequence".into()));
    }
    let mut b = Builder::new(p, 0, p.m1, Sign::Binary);
    let mut stage_values = Vec::with_capacity(stages.len());
    let mut prev: Option<Vec<ConstraintRow>> = None;
    let mut nodes = 0;
    let mut iterations = 0;
    let heuristics_ok = p.side_constraints.is_empty();
    let mut fairness_pinned = false;

    for (t, loss) in stages.iter().enumerate() {
        let spec = block_spec(p, loss, t)?;
        let floors = match &spec {
            BlockSpec::Compactness { delta, .. } => Some(delta.clone()),
            _ => None,
        };
        let expr = b.add_block(spec);
        set_objective(&mut b.model, &expr);

        let mut candidates = Vec::new();
        if let Some(rows) = &prev {
            candidates.extend(b.complete(rows));
        }
        if heuristics_ok {
            match loss {
                LossSpec::Fairness => candidates.extend(b.complete(&heuristics::opposite_pairs(p))),
                LossSpec::Compactness { .. } => {
                    let floors = floors.as_deref().unwrap_or_default();
                    let alpha = prev.as_ref().filter(|_| fairness_pinned).map(|rows| coefficient_sum(p.n, rows));
                    if let Some(rows) = heuristics::floor_cover(p, floors, alpha.as_deref()) {
                        candidates.extend(b.complete(&rows));
                    }
                }
                _ => {}
            }
        }
        let mut opts = MilpOptions {
            incumbent: None,
            ..MilpOptions::default()
        };
        if t == 0 && heuristics_ok && p.k() <= partition::MAX_OBSERVATIONS {
            if let (LossSpec::Compactness { .. }, Some(floors)) = (loss, &floors) {
                let start = pick_start(&b.model, candidates.clone()).map(|x| b.extract_rows(&x));
                let found = partition::search(p, floors, start, opts.node_limit)?;
                nodes += found.nodes;
                if let Some(x) = found.rows.as_deref().and_then(|rows| b.complete(rows)) {
                    if found.proven {
                        audit_big_m(&b, &x)?;
                        if b.model.max_violation(&x) <= FEASIBILITY_TOL {
                            let value = expr.value(&x);
                            log::debug!("stage 0 (compactness) value {value:.9} (search {:.9}), {} nodes", found.value, found.nodes);
                            stage_values.push(value);
                            pin(&mut b.model, &expr, value + epsilon);
                            prev = Some(b.extract_rows(&x));
                            continue;
                        }
                    }
                    candidates.push(x);
                }
            }
        }
        opts.incumbent = pick_start(&b.model, candidates);
        let res = solver::solve_milp_with(&b.model, &opts)?;
        nodes += res.node_count;
        iterations += res.iterations;
        let x = match res.status {
            SolveStatus::Optimal => res.solution.unwrap_or_default(),
            SolveStatus::Infeasible => return Err(ImputeError::InfeasibleImputation { row: None }),
            SolveStatus::IterationLimit => {
                return Err(ImputeError::SolverLimit {
                    subproblem: format!("stage {t} ({}) joint model, {} nodes", loss.name(), res.node_count),
                })
            }
            SolveStatus::Unbounded => {
                return Err(ImputeError::UnexpectedStatus {
                    subproblem: format!("stage {t} ({}) joint model", loss.name()),
                    status: res.status,
                })
            }
        };
        audit_big_m(&b, &x)?;
        let value = expr.value(&x);
        stage_values.push(value);
        pin(&mut b.model, &expr, value + epsilon);
        if matches!(loss, LossSpec::Fairness) {
            fairness_pinned = true;
        }
        log::debug!("stage {t} ({}) value {value:.9} after {} nodes", loss.name(), res.node_count);
        prev = Some(b.extract_rows(&x));
    }
    Ok(JointOutcome {
        rows: prev.unwrap_or_default(),
        stage_values,
        nodes,
        iterations,
    })
}

fn coefficient_sum(n: usize, rows: &[ConstraintRow]) -> Vec<f64> {
    let mut s = vec![0.0; n];
    for r in rows {
        for (sj, aj) in s.iter_mut().zip(&r.a) {
            *sj += aj;
        }
    }
    s
}

fn pin(model: &mut SolverModel, expr: &Expr, limit: f64) {
    model.add_row(Row::new(expr.terms.clone(), Relation::Le, limit - expr.constant));
}

/// Every slack switched off by `γ_ik = 1` must stay below `M − 1e-6`;
/// otherwise the big-M rows may have cut off better solutions.
fn audit_big_m(b: &Builder, x: &[f64]) -> Result<(), ImputeError> {
    use super::builder::Block;
    for block in &b.blocks {
        if let Block::Compactness { gamma, big_m, .. } = block {
            let mut worst = f64::NEG_INFINITY;
            for (i, gi) in gamma.iter().enumerate() {
                for (k, &g) in gi.iter().enumerate() {
                    if x[g] > 0.5 {
                        let d: f64 = b.slack(i, &b.p.obs.points[k]).iter().map(|&(j, v)| v * x[j]).sum();
                        worst = worst.max(d);
                    }
                }
            }
            if worst > big_m - 1e-6 {
                return Err(ImputeError::BigMTooSmall {
                    big_m: *big_m,
                    max_slack: worst,
                    suggested: (2.0 * worst).max(2.0 * big_m),
                });
            }
        }
    }
    Ok(())
}
