//! Exact compactness by search over assignments of observations to rows.
//!
//! For a fixed assignment the rows decouple: row `i` minimizes the total
//! slack of its own observations over all valid scaled rows. Call that value
//! `cost(S)`. It only grows when `S` grows and `cost(S ∪ T) ≥ cost(S) +
//! cost(T)` for disjoint `S`, `T`, so a partial assignment plus the slack
//! floors of the unassigned observations bounds every completion from below.
//! Groups are unlabeled, which removes the row permutation symmetry that
//! makes the big-M model slow.

use std::collections::HashMap;

use crate::polyhedra::{ConstraintRow, Normalization};
use crate::solver::{self, SolveStatus};

use super::builder::{BlockSpec, Builder, Sign};
use super::instance::ProblemInstance;
use super::rowwise::set_objective;
use super::ImputeError;

/// Largest observation count the bit-mask representation supports.
pub(crate) const MAX_OBSERVATIONS: usize = 64;

const ZERO_SLACK: f64 = 1e-12;

pub(crate) struct SearchOutcome {
    /// `None` only when the budget ran out before any assignment completed.
    pub rows: Option<Vec<ConstraintRow>>,
    pub value: f64,
    pub nodes: usize,
    /// False when the node budget ran out; `rows` is then the best found.
    pub proven: bool,
}

#[derive(Clone)]
struct Group {
    mask: u64,
    cost: f64,
    row: ConstraintRow,
}

struct Search<'a> {
    p: &'a ProblemInstance,
    floors: &'a [f64],
    cache: HashMap<u64, (f64, ConstraintRow)>,
    best: f64,
    best_rows: Option<Vec<ConstraintRow>>,
    nodes: usize,
    limit: usize,
}

struct OutOfBudget;

fn tol(v: f64) -> f64 {
    1e-9 * v.abs().max(1.0)
}

/// `Σ_k min_i (a_i'x^k − b_i)`.
pub(crate) fn nearest_row_total(p: &ProblemInstance, rows: &[ConstraintRow]) -> f64 {
    p.obs
        .points
        .iter()
        .map(|x| rows.iter().map(|r| r.slack(x)).fold(f64::INFINITY, f64::min))
        .sum()
}

impl<'a> Search<'a> {
    /// Smallest total slack of the observations in `mask` over one valid row.
    fn cost(&mut self, mask: u64) -> Result<(f64, ConstraintRow), ImputeError> {
        if let Some(hit) = self.cache.get(&mask) {
            return Ok(hit.clone());
        }
        let members: Vec<usize> = (0..self.p.k()).filter(|&k| mask >> k & 1 == 1).collect();
        let signs: &[Sign] = match self.p.normalization {
            Normalization::SumProxy => &[Sign::Fixed(1), Sign::Fixed(-1)],
            Normalization::L1Exact => &[Sign::Binary],
        };
        let mut best: Option<(f64, ConstraintRow)> = None;
        for &sign in signs {
            let mut b = Builder::new(self.p, 0, 1, sign);
            let expr = b.add_block(BlockSpec::Zero);
            set_objective(&mut b.model, &expr);
            for &k in &members {
                let x = self.p.obs.points[k].clone();
                for (j, v) in b.slack(0, &x) {
                    b.model.objective[j] += v;
                }
            }
            let res = if b.model.has_integrality() {
                solver::solve_milp(&b.model)?
            } else {
                solver::solve_lp(&b.model)?
            };
            match res.status {
                SolveStatus::Optimal => {}
                SolveStatus::Infeasible => continue,
                SolveStatus::IterationLimit => {
                    return Err(ImputeError::SolverLimit {
                        subproblem: "compactness group subproblem".into(),
                    })
                }
                SolveStatus::Unbounded => {
                    return Err(ImputeError::UnexpectedStatus {
                        subproblem: "compactness group subproblem".into(),
                        status: res.status,
                    })
                }
            }
            let Some(x) = res.solution else { continue };
            let row = b.extract_rows(&x).remove(0);
            let v: f64 = members.iter().map(|&k| row.slack(&self.p.obs.points[k])).sum();
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v.max(0.0), row));
            }
        }
        let hit = best.ok_or(ImputeError::InfeasibleImputation { row: None })?;
        self.cache.insert(mask, hit.clone());
        Ok(hit)
    }

    /// `group` extended by observation `k`.
    fn extend(&mut self, group: &Group, k: usize) -> Result<Group, ImputeError> {
        let mask = group.mask | 1 << k;
        if group.row.slack(&self.p.obs.points[k]) <= ZERO_SLACK {
            return Ok(Group {
                mask,
                cost: group.cost,
                row: group.row.clone(),
            });
        }
        let (cost, row) = self.cost(mask)?;
        Ok(Group {
            mask,
            cost: cost.max(group.cost),
            row,
        })
    }

    fn offer(&mut self, groups: &[Group]) {
        let mut rows: Vec<ConstraintRow> = groups.iter().map(|g| g.row.clone()).collect();
        while rows.len() < self.p.m1 {
            rows.push(rows[0].clone());
        }
        let v = nearest_row_total(self.p, &rows);
        if v < self.best - tol(self.best) || self.best_rows.is_none() && v <= self.best + tol(self.best) {
            self.best = v;
            self.best_rows = Some(rows);
        }
    }

    fn dfs(&mut self, groups: &mut Vec<Group>, open: &mut Vec<usize>) -> Result<Result<(), OutOfBudget>, ImputeError> {
        if self.nodes >= self.limit {
            return Ok(Err(OutOfBudget));
        }
        self.nodes += 1;
        let total: f64 = groups.iter().map(|g| g.cost).sum();
        if open.is_empty() {
            self.offer(groups);
            return Ok(Ok(()));
        }
        let rest: f64 = open.iter().map(|&k| self.floors[k]).sum();
        if total + rest >= self.best - tol(self.best) {
            return Ok(Ok(()));
        }

        // Children of every open observation; branch on the one whose
        // cheapest placement costs the most beyond its floor.
        let mut pick: Option<(usize, f64, Vec<(f64, Option<(usize, Group)>)>)> = None;
        for (pos, &k) in open.iter().enumerate() {
            let mut options: Vec<(f64, Option<(usize, Group)>)> = Vec::with_capacity(groups.len() + 1);
            for i in 0..groups.len() {
                let g = self.extend(&groups[i], k)?;
                options.push((g.cost - groups[i].cost, Some((i, g))));
            }
            if groups.len() < self.p.m1 {
                options.push((self.floors[k], None));
            }
            let cheapest = options.iter().map(|o| o.0).fold(f64::INFINITY, f64::min);
            let gap = cheapest - self.floors[k];
            if total + rest + gap >= self.best - tol(self.best) {
                return Ok(Ok(()));
            }
            if pick.as_ref().is_none_or(|(_, pg, _)| gap > *pg + ZERO_SLACK) {
                pick = Some((pos, gap, options));
            }
        }
        let Some((pos, _, mut options)) = pick else {
            return Ok(Ok(()));
        };
        let k = open.remove(pos);
        let others = rest - self.floors[k];
        options.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (inc, ext) in options {
            if total + inc + others >= self.best - tol(self.best) {
                break;
            }
            let flow = match ext {
                Some((i, g)) => {
                    let saved = std::mem::replace(&mut groups[i], g);
                    let r = self.dfs(groups, open)?;
                    groups[i] = saved;
                    r
                }
                None => {
                    let (cost, row) = self.cost(1 << k)?;
                    groups.push(Group { mask: 1 << k, cost, row });
                    let r = self.dfs(groups, open)?;
                    groups.pop();
                    r
                }
            };
            if flow.is_err() {
                open.insert(pos, k);
                return Ok(flow);
            }
        }
        open.insert(pos, k);
        Ok(Ok(()))
    }
}

/// Minimizes `Σ_k min_i (a_i'x^k − b_i)` over `m1` valid scaled rows.
/// `start` seeds the incumbent. Requires an instance without side
/// constraints and at most [`MAX_OBSERVATIONS`] observations.
pub(crate) fn search(
    p: &ProblemInstance,
    floors: &[f64],
    start: Option<Vec<ConstraintRow>>,
    node_limit: usize,
) -> Result<SearchOutcome, ImputeError> {
    debug_assert!(p.side_constraints.is_empty() && p.k() <= MAX_OBSERVATIONS);
    let mut s = Search {
        p,
        floors,
        cache: HashMap::new(),
        best: f64::INFINITY,
        best_rows: None,
        nodes: 0,
        limit: node_limit,
    };
    if let Some(rows) = start.filter(|r| r.len() == p.m1) {
        s.best = nearest_row_total(p, &rows);
        s.best_rows = Some(rows);
    }
    let floor_total: f64 = floors.iter().sum();
    let mut proven = true;
    if s.best > floor_total + tol(floor_total) || s.best_rows.is_none() {
        let mut groups = Vec::with_capacity(p.m1);
        let mut open: Vec<usize> = (0..p.k()).collect();
        proven = s.dfs(&mut groups, &mut open)?.is_ok();
    }
    Ok(SearchOutcome {
        value: s.best,
        rows: s.best_rows,
        nodes: s.nodes,
        proven,
    })
}
