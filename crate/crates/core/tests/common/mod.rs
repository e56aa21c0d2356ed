//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use feasregion::imputation::{ImputedRegion, ProblemInstance};
use feasregion::polyhedra::{ConstraintRow, Normalization, NormalizationTag, Polyhedron};
use feasregion::solver::{solve_lp, SolveStatus, SolverModel, VarBounds};

pub fn case_one_points() -> Vec<Vec<f64>> {
    vec![vec![2.0, 2.0], vec![1.0, 1.0], vec![1.0, 2.0], vec![2.0, 1.0], vec![1.5, 1.5]]
}

pub fn case_one() -> ProblemInstance {
    let known = Polyhedron::new(2, vec![ConstraintRow::new(vec![1.0, 1.0], 1.0)]).unwrap();
    ProblemInstance::new(vec![-1.0, -1.0], case_one_points(), known, 4, Normalization::SumProxy).unwrap()
}

pub fn case_two_points() -> Vec<Vec<f64>> {
    [
        (1.0, 1.0),
        (2.0, 1.0),
        (4.0, 2.0),
        (4.0, 5.0),
        (3.0, 6.0),
        (2.0, 4.0),
        (3.0, 4.0),
        (3.0, 2.0),
        (4.0, 3.0),
        (1.0, 3.0),
        (2.0, 2.5),
        (1.0, 5.0),
        (5.0, 2.5),
        (5.0, 4.0),
        (2.7, 3.2),
        (2.3, 4.7),
        (1.4, 4.8),
        (3.8, 4.3),
        (4.8, 3.3),
    ]
    .iter()
    .map(|&(a, b)| vec![a, b])
    .collect()
}

pub fn case_two() -> ProblemInstance {
    let known = Polyhedron::new(2, vec![ConstraintRow::new(vec![-1.0, 0.0], -5.0)]).unwrap();
    ProblemInstance::new(vec![1.0, 1.0], case_two_points(), known, 6, Normalization::SumProxy).unwrap()
}

/// Rows `x1 ≥ lo, x2 ≥ lo, x1 ≤ hi, x2 ≤ hi`.
pub fn square_rows(lo: f64, hi: f64) -> Vec<ConstraintRow> {
    vec![
        ConstraintRow::new(vec![1.0, 0.0], lo),
        ConstraintRow::new(vec![0.0, 1.0], lo),
        ConstraintRow::le(vec![1.0, 0.0], hi),
        ConstraintRow::le(vec![0.0, 1.0], hi),
    ]
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Minimizes a convex function on `[lo, hi]`: grid of `step`, then ternary
/// search around the best grid point.
pub fn grid_then_ternary(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let steps = ((hi - lo) / step).ceil() as usize;
    let mut best = (lo, f(lo));
    for i in 0..=steps {
        let t = (lo + i as f64 * step).min(hi);
        let v = f(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) <= f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let t = 0.5 * (a + b);
    let v = f(t);
    if v < best.1 {
        (t, v)
    } else {
        best
    }
}

/// Single-row adjacency in the plane under the sum scale: `a2 = σ − a1`,
/// `b = min_k a'x^k`, objective `Σ_k (a'x^k − b)`, convex in `a1`.
pub fn adjacency_row_oracle(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for sigma in [1.0, -1.0] {
        let f = |a1: f64| {
            let a = [a1, sigma - a1];
            let vals: Vec<f64> = points.iter().map(|x| dot(&a, x)).collect();
            let b = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            vals.iter().map(|v| v - b).sum::<f64>()
        };
        best = best.min(grid_then_ternary(f, -10.0, 10.0, 1e-4).1);
    }
    best
}

/// Valid sum-scaled rows of a planar point set: lines through every pair of
/// distinct points (both orientations) and the axis-parallel supports.
pub fn candidate_rows_2d(points: &[Vec<f64>]) -> Vec<ConstraintRow> {
    let mut normals: Vec<[f64; 2]> = vec![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
    for p in points {
        for q in points {
            let d = [q[0] - p[0], q[1] - p[1]];
            if d[0] == 0.0 && d[1] == 0.0 {
                continue;
            }
            normals.push([-d[1], d[0]]);
        }
    }
    let mut out: Vec<ConstraintRow> = Vec::new();
    for nrm in normals {
        let s = nrm[0] + nrm[1];
        if s.abs() < 1e-12 {
            continue;
        }
        let a = vec![nrm[0] / s.abs(), nrm[1] / s.abs()];
        let b = points.iter().map(|x| dot(&a, x)).fold(f64::INFINITY, f64::min);
        if !out.iter().any(|r| close(&r.a, &a, 1e-12) && (r.b - b).abs() < 1e-12) {
            out.push(ConstraintRow { a, b, tag: NormalizationTag::None });
        }
    }
    out
}

/// `min over multisets of m1 candidate rows` of `Σ_k min_i d_ik`.
pub fn compactness_oracle_2d(points: &[Vec<f64>], m1: usize) -> f64 {
    let cands = candidate_rows_2d(points);
    let slack: Vec<Vec<f64>> = cands
        .iter()
        .map(|r| points.iter().map(|x| dot(&r.a, x) - r.b).collect())
        .collect();
    let mut best = f64::INFINITY;
    let mut pick = vec![0usize; m1];
    loop {
        let v: f64 = (0..points.len())
            .map(|k| pick.iter().map(|&i| slack[i][k]).fold(f64::INFINITY, f64::min))
            .sum();
        best = best.min(v);
        // next non-decreasing index tuple
        let mut pos = m1;
        loop {
            if pos == 0 {
                return best;
            }
            pos -= 1;
            if pick[pos] + 1 < cands.len() {
                pick[pos] += 1;
                for j in pos + 1..m1 {
                    pick[j] = pick[pos];
                }
                break;
            }
        }
    }
}

/// Best objective over every 0/1 assignment of the integral variables, each
/// solved as an LP with the binaries fixed. `None` when all are infeasible.
pub fn enumerate_milp(model: &SolverModel) -> Option<f64> {
    let ints: Vec<usize> = (0..model.num_vars).filter(|&j| model.integrality[j]).collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1u32 << ints.len()) {
        let mut m = model.clone();
        for (t, &j) in ints.iter().enumerate() {
            let v = f64::from((mask >> t) & 1);
            m.bounds[j] = VarBounds::new(v, v);
            m.integrality[j] = false;
        }
        let r = solve_lp(&m).unwrap();
        if r.status == SolveStatus::Optimal {
            let v = r.objective_value.unwrap();
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    best
}

/// Checks every output invariant: observation feasibility, row scale and
/// the verification report.
pub fn output_ok(p: &ProblemInstance, r: &ImputedRegion) -> Result<(), String> {
    for (i, row) in r.imputed_rows.iter().enumerate() {
        for (k, x) in p.obs.points.iter().enumerate() {
            let s = dot(&row.a, x) - row.b;
            if s < -1e-7 {
                return Err(format!("row {i} cuts observation {k} by {s}"));
            }
        }
        let e = match p.normalization {
            Normalization::SumProxy => (row.a.iter().sum::<f64>().abs() - 1.0).abs(),
            Normalization::L1Exact => (row.a.iter().map(|v| v.abs()).sum::<f64>() - 1.0).abs(),
        };
        if e > 1e-9 {
            return Err(format!("row {i} scale error {e}"));
        }
    }
    if r.imputed_rows.len() != p.m1 {
        return Err(format!("{} rows for m1 = {}", r.imputed_rows.len(), p.m1));
    }
    if !r.verification.all_ok() {
        return Err(format!("verification {:?}", r.verification));
    }
    Ok(())
}
