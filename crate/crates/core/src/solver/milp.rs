use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::lp::{lp_core, LpOptions};
use super::model::{SolveStatus, SolverModel, SolverResult, VarBounds};
use super::{SolverError, FEASIBILITY_TOL, INTEGRALITY_TOL};

/// Environment variable that overrides [`MilpOptions::node_limit`].
pub const NODE_LIMIT_ENV: &str = "FEASREGION_SOLVER_NODE_LIMIT";

#[derive(Debug, Clone, PartialEq)]
pub struct MilpOptions {
    pub node_limit: usize,
    pub lp: LpOptions,
    /// Candidate solution used as the starting incumbent if it is feasible
    /// and integral. An infeasible start is ignored.
    pub incumbent: Option<Vec<f64>>,
}

impl Default for MilpOptions {
    /// Node cap of 100 000 unless `FEASREGION_SOLVER_NODE_LIMIT` holds a number.
    fn default() -> Self {
        let node_limit = std::env::var(NODE_LIMIT_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(100_000);
        MilpOptions {
            node_limit,
            lp: LpOptions::default(),
            incumbent: None,
        }
    }
}

pub fn solve_milp(model: &SolverModel) -> Result<SolverResult, SolverError> {
    solve_milp_with(model, &MilpOptions::default())
}

struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    bounds: Vec<VarBounds>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: the "greatest" node is the lowest bound,
    // then the deepest, then the earliest created.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

fn is_integral(model: &SolverModel, x: &[f64]) -> bool {
    model
        .integrality
        .iter()
        .zip(x)
        .all(|(&int, &v)| !int || (v - v.round()).abs() <= INTEGRALITY_TOL)
}

/// Lower bound on the objective implied by the variable bounds alone.
fn trivial_bound(model: &SolverModel) -> f64 {
    let mut v = model.objective_offset;
    for (c, b) in model.objective.iter().zip(&model.bounds) {
        if *c > 0.0 {
            v += c * b.lower;
        } else if *c < 0.0 {
            v += c * b.upper;
        }
    }
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

fn prune_tol(best: f64) -> f64 {
    1e-9 * best.abs().max(1.0)
}

pub fn solve_milp_with(model: &SolverModel, opts: &MilpOptions) -> Result<SolverResult, SolverError> {
    model.validate()?;
    if model.has_quadratic() {
        return Err(SolverError::NotApplicable(
            "solve_milp does not handle quadratic terms".into(),
        ));
    }

    let tb = trivial_bound(model);
    let mut best: Option<(f64, Vec<f64>)> = None;
    if let Some(start) = &opts.incumbent {
        if start.len() == model.num_vars
            && model.max_violation(start) <= FEASIBILITY_TOL
            && is_integral(model, start)
        {
            let mut x = start.clone();
            for (v, &int) in x.iter_mut().zip(&model.integrality) {
                if int {
                    *v = v.round();
                }
            }
            if model.max_violation(&x) <= FEASIBILITY_TOL {
                best = Some((model.evaluate(&x), x));
            }
        } else {
            log::debug!("MIP start rejected: infeasible or fractional");
        }
    }
    if let Some((v, x)) = &best {
        if *v <= tb + prune_tol(tb) {
            return Ok(SolverResult {
                status: SolveStatus::Optimal,
                solution: Some(x.clone()),
                objective_value: Some(*v),
                node_count: 0,
                iterations: 0,
                duals: None,
            });
        }
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Node {
        bound: tb,
        depth: 0,
        seq,
        bounds: model.bounds.clone(),
    });
    let mut nodes = 0usize;
    let mut pivots = 0usize;

    while let Some(node) = heap.pop() {
        if let Some((bv, _)) = &best {
            if node.bound >= bv - prune_tol(*bv) {
                break;
            }
        }
        if nodes >= opts.node_limit {
            let (obj, sol) = match best {
                Some((v, x)) => (Some(v), Some(x)),
                None => (None, None),
            };
            return Ok(SolverResult {
                status: SolveStatus::IterationLimit,
                solution: sol,
                objective_value: obj,
                node_count: nodes,
                iterations: pivots,
                duals: None,
            });
        }
        nodes += 1;
        let relax = lp_core(model, &node.bounds, &opts.lp);
        pivots += relax.iterations;
        match relax.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => continue,
            SolveStatus::Unbounded => {
                let mut r = SolverResult::without_solution(SolveStatus::Unbounded, pivots);
                r.node_count = nodes;
                return Ok(r);
            }
            SolveStatus::IterationLimit => {
                let mut r = SolverResult::without_solution(SolveStatus::IterationLimit, pivots);
                r.node_count = nodes;
                return Ok(r);
            }
        }
        let x = relax.solution.expect("optimal LP carries a solution");
        let obj = relax.objective_value.unwrap_or(f64::NEG_INFINITY).max(tb);
        if let Some((bv, _)) = &best {
            if obj >= bv - prune_tol(*bv) {
                continue;
            }
        }

        let mut branch: Option<(usize, f64)> = None;
        for (j, &int) in model.integrality.iter().enumerate() {
            if !int {
                continue;
            }
            let f = (x[j] - x[j].round()).abs();
            if f > INTEGRALITY_TOL && branch.is_none_or(|(_, bf)| f > bf) {
                branch = Some((j, f));
            }
        }

        match branch {
            None => {
                let mut fixed = node.bounds.clone();
                for (j, &int) in model.integrality.iter().enumerate() {
                    if int {
                        let v = x[j].round();
                        fixed[j] = VarBounds::new(v, v);
                    }
                }
                let sol = lp_core(model, &fixed, &opts.lp);
                pivots += sol.iterations;
                let cand = match (sol.status, sol.solution) {
                    (SolveStatus::Optimal, Some(xs)) if model.max_violation(&xs) <= FEASIBILITY_TOL => {
                        Some(xs)
                    }
                    _ if model.max_violation(&x) <= FEASIBILITY_TOL => Some(x.clone()),
                    _ => None,
                };
                if let Some(xs) = cand {
                    let v = model.evaluate(&xs);
                    if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                        best = Some((v, xs));
                    }
                }
            }
            Some((j, _)) => {
                let up_first = x[j].round() >= 0.5;
                let order = if up_first { [1.0, 0.0] } else { [0.0, 1.0] };
                for v in order {
                    let mut child = node.bounds.clone();
                    child[j] = VarBounds::new(v, v);
                    seq += 1;
                    heap.push(Node {
                        bound: obj,
                        depth: node.depth + 1,
                        seq,
                        bounds: child,
                    });
                }
            }
        }
    }

    Ok(match best {
        Some((v, x)) => SolverResult {
            status: SolveStatus::Optimal,
            solution: Some(x),
            objective_value: Some(v),
            node_count: nodes,
            iterations: pivots,
            duals: None,
        },
        None => {
            let mut r = SolverResult::without_solution(SolveStatus::Infeasible, pivots);
            r.node_count = nodes;
            r
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::model::{Relation, Row};

    fn knapsack() -> SolverModel {
        let mut m = SolverModel::new();
        m.add_binary(-3.0);
        m.add_binary(-2.0);
        m.add_row(Row::from_dense(&[2.0, 1.0], Relation::Le, 2.0));
        m
    }

    #[test]
    fn knapsack_optimum() {
        let r = solve_milp(&knapsack()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.solution.unwrap(), vec![1.0, 0.0]);
        assert!((r.objective_value.unwrap() + 3.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_binaries_reduce_to_lp() {
        let mut m = SolverModel::new();
        m.add_var(VarBounds::new(1.0, 1.0), 1.0, true);
        m.add_var(VarBounds::NONNEG, 1.0, false);
        m.add_row(Row::from_dense(&[1.0, 1.0], Relation::Ge, 2.5));
        let r = solve_milp(&m).unwrap();
        assert!((r.objective_value.unwrap() - 2.5).abs() < 1e-9);
    }

    #[test]
    fn infeasible_root() {
        let mut m = knapsack();
        m.add_row(Row::from_dense(&[1.0, 1.0], Relation::Ge, 3.0));
        assert_eq!(solve_milp(&m).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn start_meeting_trivial_bound_skips_search() {
        let mut m = SolverModel::new();
        m.add_binary(0.0);
        m.add_var(VarBounds::NONNEG, 1.0, false);
        m.add_row(Row::from_dense(&[1.0, 1.0], Relation::Ge, 1.0));
        let opts = MilpOptions {
            incumbent: Some(vec![1.0, 0.0]),
            ..MilpOptions::default()
        };
        let r = solve_milp_with(&m, &opts).unwrap();
        assert_eq!(r.node_count, 0);
        assert_eq!(r.objective_value, Some(0.0));
    }

    #[test]
    fn infeasible_start_is_ignored() {
        let opts = MilpOptions {
            incumbent: Some(vec![1.0, 1.0]),
            ..MilpOptions::default()
        };
        let r = solve_milp_with(&knapsack(), &opts).unwrap();
        assert!((r.objective_value.unwrap() + 3.0).abs() < 1e-9);
    }

    #[test]
    fn node_limit_reports_iteration_limit() {
        let mut m = SolverModel::new();
        for _ in 0..6 {
            m.add_binary(-1.0);
        }
        m.add_row(Row::from_dense(&[2.0; 6], Relation::Le, 7.0));
        let opts = MilpOptions {
            node_limit: 1,
            ..MilpOptions::default()
        };
        assert_eq!(solve_milp_with(&m, &opts).unwrap().status, SolveStatus::IterationLimit);
    }
}
