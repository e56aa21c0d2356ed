//! Five observations in the plane: every loss on the same instance.

use feasregion::imputation::{impute, LossSpec, ProblemInstance};
use feasregion::polyhedra::{region_vertices_2d, ConstraintRow, Normalization, Polyhedron};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let points = vec![vec![2.0, 2.0], vec![1.0, 1.0], vec![1.0, 2.0], vec![2.0, 1.0], vec![1.5, 1.5]];
    let known = Polyhedron::new(2, vec![ConstraintRow::new(vec![1.0, 1.0], 1.0)])?;
    let p = ProblemInstance::new(vec![-1.0, -1.0], points, known, 4, Normalization::SumProxy)?;
    for loss in [
        LossSpec::Indifference,
        LossSpec::Adjacency,
        LossSpec::Fairness,
        LossSpec::compactness(),
    ] {
        let r = impute(&p, &loss)?;
        println!("{:<13} loss {:.6}", loss.name(), r.loss_value);
        for row in &r.imputed_rows {
            println!("    {:?} . x >= {}", row.a, row.b);
        }
        match region_vertices_2d(&r.region()) {
            Ok(v) => println!("    vertices {v:?}"),
            Err(e) => println!("    {e}"),
        }
    }
    Ok(())
}
