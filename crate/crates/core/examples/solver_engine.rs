//! The bundled LP, MILP and QP engines on small models.

use feasregion::solver::{dual_objective, solve_lp, solve_milp, solve_qp_activeset, Relation, Row, SolverModel, VarBounds};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut lp = SolverModel::new();
    let x1 = lp.add_var(VarBounds::NONNEG, -1.0, false);
    let x2 = lp.add_var(VarBounds::NONNEG, -1.0, false);
    lp.add_row(Row::new(vec![(x1, 1.0)], Relation::Le, 2.0));
    lp.add_row(Row::new(vec![(x2, 1.0)], Relation::Le, 2.0));
    let r = solve_lp(&lp)?;
    println!("lp: {:?} x = {:?} value {:?} dual value {:?}", r.status, r.solution, r.objective_value, r.duals.as_deref().map(|y| dual_objective(&lp, y)));

    let mut ip = SolverModel::new();
    let z1 = ip.add_binary(-3.0);
    let z2 = ip.add_binary(-2.0);
    ip.add_row(Row::new(vec![(z1, 2.0), (z2, 1.0)], Relation::Le, 2.0));
    let r = solve_milp(&ip)?;
    println!("milp: {:?} z = {:?} value {:?} nodes {}", r.status, r.solution, r.objective_value, r.node_count);

    let mut qp = SolverModel::with_free_vars(1);
    qp.set_quadratic(0, 1.0);
    qp.objective[0] = -6.0;
    qp.objective_offset = 9.0;
    qp.add_row(Row::new(vec![(0, 1.0)], Relation::Ge, 5.0));
    let r = solve_qp_activeset(&qp)?;
    println!("qp: {:?} x = {:?} value {:?}", r.status, r.solution, r.objective_value);
    Ok(())
}
