//! Preferred point under box uncertainty, then imputation around it.

use feasregion::forward::robust_preferred_box;
use feasregion::imputation::{impute, LossSpec, ProblemInstance};
use feasregion::polyhedra::{ConstraintRow, Normalization, Polyhedron};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = vec![-1.0, -1.0];
    let mut points = vec![vec![2.0, 2.0], vec![1.0, 1.0], vec![1.0, 2.0], vec![2.0, 1.0], vec![1.5, 1.5]];
    for radius in [0.0, 0.25, 0.5] {
        println!("radius {radius}: {:?}", robust_preferred_box(&points[0], radius, &c)?);
    }
    points[0] = robust_preferred_box(&points[0], 0.5, &c)?;
    let known = Polyhedron::new(2, vec![ConstraintRow::new(vec![1.0, 1.0], 1.0)])?;
    let p = ProblemInstance::new(c, points, known, 4, Normalization::SumProxy)?;
    let r = impute(&p, &LossSpec::Adjacency)?;
    println!("forward optimum {:?} at preferred value {}", r.verification.forward_optimum, r.verification.preferred_value);
    Ok(())
}
