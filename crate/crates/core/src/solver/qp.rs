use super::dense::solve_square;
use super::model::{Relation, SolveStatus, SolverModel, SolverResult};
use super::SolverError;

pub const QP_MAX_VARS: usize = 16;
/// Inequality cap, counting finite variable bounds as inequalities.
pub const QP_MAX_INEQUALITIES: usize = 24;

const KKT_TOL: f64 = 1e-9;

/// `coeffs · x ≥ rhs` (or `=`), dense.
struct Lin {
    coeffs: Vec<f64>,
    rhs: f64,
}

/// Minimizes a convex diagonal QP by enumerating active sets of inequality
/// rows in order of increasing size. For a convex problem every KKT point is a
/// global minimizer, so the first primal- and dual-feasible candidate is
/// returned.
pub fn solve_qp_activeset(model: &SolverModel) -> Result<SolverResult, SolverError> {
    model.validate()?;
    if model.has_integrality() {
        return Err(SolverError::NotApplicable(
            "solve_qp_activeset does not handle integral variables".into(),
        ));
    }
    let n = model.num_vars;
    let q = model
        .quadratic_diag
        .clone()
        .unwrap_or_else(|| vec![0.0; n]);

    let mut eqs: Vec<Lin> = Vec::new();
    let mut ineqs: Vec<Lin> = Vec::new();
    for row in &model.rows {
        let mut coeffs = vec![0.0; n];
        for &(j, v) in &row.terms {
            coeffs[j] += v;
        }
        match row.relation {
            Relation::Eq => eqs.push(Lin { coeffs, rhs: row.rhs }),
            Relation::Ge => ineqs.push(Lin { coeffs, rhs: row.rhs }),
            Relation::Le => ineqs.push(Lin {
                coeffs: coeffs.iter().map(|v| -v).collect(),
                rhs: -row.rhs,
            }),
        }
    }
    for (j, b) in model.bounds.iter().enumerate() {
        let mut unit = vec![0.0; n];
        unit[j] = 1.0;
        if b.lower.is_finite() && b.upper.is_finite() && b.lower == b.upper {
            eqs.push(Lin { coeffs: unit, rhs: b.lower });
            continue;
        }
        if b.lower.is_finite() {
            ineqs.push(Lin { coeffs: unit.clone(), rhs: b.lower });
        }
        if b.upper.is_finite() {
            ineqs.push(Lin {
                coeffs: unit.iter().map(|v| -v).collect(),
                rhs: -b.upper,
            });
        }
    }
    if n > QP_MAX_VARS || ineqs.len() > QP_MAX_INEQUALITIES {
        return Err(SolverError::SizeGuard(format!(
            "active-set QP supports at most {QP_MAX_VARS} variables and {QP_MAX_INEQUALITIES} \
             inequalities, got {n} and {}",
            ineqs.len()
        )));
    }

    let max_active = n.saturating_sub(eqs.len()).min(ineqs.len());
    let mut tried = 0usize;
    for size in 0..=max_active {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            tried += 1;
            if let Some(x) = kkt_candidate(&q, &model.objective, &eqs, &ineqs, &idx) {
                let objective = model.evaluate(&x);
                return Ok(SolverResult {
                    status: SolveStatus::Optimal,
                    solution: Some(x),
                    objective_value: Some(objective),
                    node_count: 0,
                    iterations: tried,
                    duals: None,
                });
            }
            if !next_combination(&mut idx, ineqs.len()) {
                break;
            }
        }
    }
    Ok(SolverResult::without_solution(SolveStatus::Infeasible, tried))
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in (i + 1)..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn kkt_candidate(q: &[f64], c: &[f64], eqs: &[Lin], ineqs: &[Lin], active: &[usize]) -> Option<Vec<f64>> {
    let n = q.len();
    let rows: Vec<&Lin> = eqs.iter().chain(active.iter().map(|&i| &ineqs[i])).collect();
    let size = n + rows.len();
    let mut m = vec![0.0; size * size];
    let mut rhs = vec![0.0; size];
    for j in 0..n {
        m[j * size + j] = 2.0 * q[j];
        rhs[j] = -c[j];
        for (r, lin) in rows.iter().enumerate() {
            m[j * size + n + r] = -lin.coeffs[j];
        }
    }
    for (r, lin) in rows.iter().enumerate() {
        let i = n + r;
        m[i * size..i * size + n].copy_from_slice(&lin.coeffs);
        rhs[i] = lin.rhs;
    }
    let sol = solve_square(m, rhs, size)?;
    let x = sol[..n].to_vec();
    if sol[n + eqs.len()..].iter().any(|&l| l < -KKT_TOL) {
        return None;
    }
    let dot = |lin: &Lin| lin.coeffs.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
    let scale = |lin: &Lin| KKT_TOL * (1.0 + lin.rhs.abs());
    if eqs.iter().any(|e| (dot(e) - e.rhs).abs() > scale(e)) {
        return None;
    }
    if ineqs.iter().any(|g| dot(g) < g.rhs - scale(g)) {
        return None;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::model::{Row, VarBounds};

    #[test]
    fn projection_onto_half_line() {
        let mut m = SolverModel::with_free_vars(1);
        m.objective = vec![-6.0];
        m.objective_offset = 9.0;
        m.set_quadratic(0, 1.0);
        m.add_row(Row::from_dense(&[1.0], Relation::Ge, 5.0));
        let r = solve_qp_activeset(&m).unwrap();
        assert!((r.solution.unwrap()[0] - 5.0).abs() < 1e-12);
        assert!((r.objective_value.unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn single_active_bound() {
        let mut m = SolverModel::with_free_vars(2);
        m.objective = vec![-2.3, 0.0];
        m.objective_offset = 1.15 * 1.15;
        m.set_quadratic(0, 1.0);
        m.set_quadratic(1, 1.0);
        m.add_row(Row::from_dense(&[1.0, 0.0], Relation::Le, 1.0));
        let x = solve_qp_activeset(&m).unwrap().solution.unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1].abs() < 1e-12);
    }

    #[test]
    fn size_guard() {
        let mut m = SolverModel::new();
        for _ in 0..17 {
            m.add_var(VarBounds::FREE, 0.0, false);
        }
        m.set_quadratic(0, 1.0);
        assert!(matches!(solve_qp_activeset(&m), Err(SolverError::SizeGuard(_))));
    }

    #[test]
    fn infeasible_constraints() {
        let mut m = SolverModel::with_free_vars(1);
        m.set_quadratic(0, 1.0);
        m.add_row(Row::from_dense(&[1.0], Relation::Ge, 2.0));
        m.add_row(Row::from_dense(&[1.0], Relation::Le, 1.0));
        assert_eq!(solve_qp_activeset(&m).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn combinations_enumerate_all() {
        let mut idx = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut idx, 4) {
            count += 1;
        }
        assert_eq!(count, 6);
    }
}
