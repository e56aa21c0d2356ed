//! Fitting a prior box: a valid prior comes back unchanged, an invalid one is
//! moved to the nearest valid rows.

use feasregion::imputation::{impute, Distance, LossSpec, Prior, ProblemInstance};
use feasregion::polyhedra::{ConstraintRow, Normalization, Polyhedron};

fn square(lo: f64, hi: f64) -> Prior {
    Prior::from_rows(&[
        ConstraintRow::new(vec![1.0, 0.0], lo),
        ConstraintRow::new(vec![0.0, 1.0], lo),
        ConstraintRow::le(vec![1.0, 0.0], hi),
        ConstraintRow::le(vec![0.0, 1.0], hi),
    ])
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let points = vec![vec![2.0, 2.0], vec![1.0, 1.0], vec![1.0, 2.0], vec![2.0, 1.0], vec![1.5, 1.5]];
    let known = Polyhedron::new(2, vec![ConstraintRow::new(vec![1.0, 1.0], 1.0)])?;
    let p = ProblemInstance::new(vec![-1.0, -1.0], points, known, 4, Normalization::SumProxy)?;
    for (lo, hi, distance) in [(0.5, 2.5, Distance::L2), (1.15, 1.85, Distance::L2), (1.15, 1.85, Distance::L1)] {
        let loss = LossSpec::Adherence {
            prior: square(lo, hi),
            weights: None,
            distance,
        };
        let r = impute(&p, &loss)?;
        println!("prior [{lo}, {hi}]^2 {distance:?}: loss {:.6}", r.loss_value);
        for row in &r.imputed_rows {
            println!("    {:?} . x >= {:.6}", row.a, row.b);
        }
    }
    Ok(())
}
