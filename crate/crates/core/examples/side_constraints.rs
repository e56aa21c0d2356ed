//! Partially known rows: fix the right-hand side of two rows.

use feasregion::imputation::{impute, LossSpec, ProblemInstance, SideConstraint};
use feasregion::polyhedra::{ConstraintRow, Normalization, Polyhedron};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let points = vec![vec![2.0, 2.0], vec![1.0, 1.0], vec![1.0, 2.0], vec![2.0, 1.0], vec![1.5, 1.5]];
    let known = Polyhedron::new(2, vec![ConstraintRow::new(vec![1.0, 1.0], 1.0)])?;
    let p = ProblemInstance::new(vec![-1.0, -1.0], points, known, 3, Normalization::SumProxy)?
        .with_side_constraints(vec![SideConstraint::fix_rhs(Some(vec![0, 1]), 2, 0.5)])?;
    let r = impute(&p, &LossSpec::Adjacency)?;
    for (d, row) in r.diagnostics.iter().zip(&r.imputed_rows) {
        println!("row {} ({:?}): {:?} . x >= {:.6}", d.row, d.source, row.a, row.b);
    }
    Ok(())
}
