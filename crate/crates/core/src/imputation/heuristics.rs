//! Starting solutions for the joint models. They only need to be feasible;
//! branch and bound certifies optimality.

use crate::polyhedra::{dot, ConstraintRow, Normalization};
use crate::solver::{self, Relation, Row, SolveStatus};

use super::builder::{exact_scale, BlockSpec, Builder, Sign};
use super::instance::ProblemInstance;
use super::rowwise::set_objective;

/// Pairs of opposite axis rows `x_j ≥ min_k x_j^k`, `−x_j ≥ −max_k x_j^k`.
/// Each pair adds the same total slack to every observation, so an even
/// number of rows gives zero deviation.
pub(crate) fn opposite_pairs(p: &ProblemInstance) -> Vec<ConstraintRow> {
    (0..p.m1)
        .map(|i| {
            let j = (i / 2) % p.n;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let mut a = vec![0.0; p.n];
            a[j] = sign;
            let b = p
                .obs
                .points
                .iter()
                .map(|x| sign * x[j])
                .fold(f64::INFINITY, f64::min);
            exact_scale(a, b, p.normalization)
        })
        .collect()
}

/// Row through observation `target` (slack at most `floor`) that minimizes
/// the total slack of the observations in `open`.
fn covering_row(p: &ProblemInstance, target: usize, floor: f64, open: &[usize]) -> Option<ConstraintRow> {
    let mut best: Option<(f64, ConstraintRow)> = None;
    for sigma in [1i8, -1] {
        let mut b = Builder::new(p, 0, 1, Sign::Fixed(sigma));
        let x = p.obs.points[target].clone();
        b.model.add_row(Row::new(b.slack(0, &x), Relation::Le, floor + 1e-9));
        let expr = b.add_block(BlockSpec::Zero);
        set_objective(&mut b.model, &expr);
        for &k in open {
            let xk = p.obs.points[k].clone();
            for (j, v) in b.slack(0, &xk) {
                b.model.objective[j] += v;
            }
        }
        let res = solver::solve_lp(&b.model).ok()?;
        if res.status != SolveStatus::Optimal {
            continue;
        }
        let v = res.objective_value?;
        if best.as_ref().is_none_or(|(bv, _)| v < bv - 1e-9 * (1.0 + bv.abs())) {
            best = Some((v, b.extract_rows(res.solution.as_deref()?).remove(0)));
        }
    }
    best.map(|(_, r)| r)
}

/// Greedy cover: repeatedly take the lowest-index observation that is not yet
/// at its slack floor and add the row through it that pulls the remaining
/// ones closest. When `alpha` is given the rows are completed so that their
/// coefficient sum equals `alpha` (which keeps a pinned fairness value).
pub(crate) fn floor_cover(p: &ProblemInstance, floors: &[f64], alpha: Option<&[f64]>) -> Option<Vec<ConstraintRow>> {
    if p.normalization != Normalization::SumProxy {
        return None;
    }
    let mut cover: Vec<ConstraintRow> = Vec::new();
    let mut open: Vec<usize> = (0..p.k()).collect();
    while let Some(&target) = open.first() {
        if cover.len() == p.m1 {
            break;
        }
        let row = covering_row(p, target, floors[target], &open)?;
        open.retain(|&k| k != target && row.slack(&p.obs.points[k]) > floors[k] + 1e-7);
        cover.push(row);
    }
    match alpha {
        None => {
            while cover.len() < p.m1 {
                cover.push(cover[0].clone());
            }
            Some(cover)
        }
        Some(alpha) => {
            while !cover.is_empty() {
                if let Some(rest) = balance(p, &cover, alpha) {
                    cover.extend(rest);
                    return Some(cover);
                }
                cover.pop();
            }
            None
        }
    }
}

/// `r = m1 − |cover|` rows of sum scale whose coefficients add up to
/// `alpha − Σ cover`.
fn balance(p: &ProblemInstance, cover: &[ConstraintRow], alpha: &[f64]) -> Option<Vec<ConstraintRow>> {
    let r = p.m1 - cover.len();
    let mut v = alpha.to_vec();
    for row in cover {
        for (vj, aj) in v.iter_mut().zip(&row.a) {
            *vj -= aj;
        }
    }
    let s_raw: f64 = v.iter().sum();
    let s = s_raw.round();
    if (s - s_raw).abs() > 1e-6 || r == 0 || s.abs() > r as f64 || (r as i64 - s as i64) % 2 != 0 {
        return None;
    }
    let plus = ((r as i64 + s as i64) / 2) as usize;
    let rf = r as f64;
    Some(
        (0..r)
            .map(|t| {
                let sigma = if t < plus { 1.0 } else { -1.0 };
                let mut a: Vec<f64> = v.iter().map(|vj| vj / rf).collect();
                a[0] += sigma - s_raw / rf;
                let b = p.obs.points.iter().map(|x| dot(&a, x)).fold(f64::INFINITY, f64::min);
                exact_scale(a, b, Normalization::SumProxy)
            })
            .collect(),
    )
}
