//! Fairness first, adjacency second: the result is the hull of the points.

use feasregion::imputation::{impute, LossSpec, ProblemInstance};
use feasregion::polyhedra::{region_vertices_2d, ConstraintRow, Normalization, Polyhedron};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let points = vec![vec![2.0, 2.0], vec![1.0, 1.0], vec![1.0, 2.0], vec![2.0, 1.0], vec![1.5, 1.5]];
    let known = Polyhedron::new(2, vec![ConstraintRow::new(vec![1.0, 1.0], 1.0)])?;
    let p = ProblemInstance::new(vec![-1.0, -1.0], points, known, 4, Normalization::SumProxy)?;
    let r = impute(&p, &LossSpec::combined(vec![LossSpec::Fairness, LossSpec::Adjacency]))?;
    println!("stage values {:?}", r.stage_values);
    println!("vertices {:?}", region_vertices_2d(&r.region())?);
    Ok(())
}
