//! Writes an SVG of the fairness-then-adjacency region to the given path.

use feasregion::cli::render_region_svg;
use feasregion::imputation::{impute, LossSpec, ProblemInstance};
use feasregion::polyhedra::{ConstraintRow, Normalization, Polyhedron};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "region.svg".to_string());
    let points = vec![vec![2.0, 2.0], vec![1.0, 1.0], vec![1.0, 2.0], vec![2.0, 1.0], vec![1.5, 1.5]];
    let known = Polyhedron::new(2, vec![ConstraintRow::new(vec![1.0, 1.0], 1.0)])?;
    let p = ProblemInstance::new(vec![-1.0, -1.0], points, known, 4, Normalization::SumProxy)?;
    let r = impute(&p, &LossSpec::combined(vec![LossSpec::Fairness, LossSpec::Adjacency]))?;
    let svg = render_region_svg(&p.obs.points, p.obs.preferred_index, &r.known_set, &r.imputed_rows)?;
    std::fs::write(&out, svg)?;
    println!("wrote {out}");
    Ok(())
}
