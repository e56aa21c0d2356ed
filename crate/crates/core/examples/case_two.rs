//! Nineteen observations, six rows to impute, read from the bundled problem file.

use feasregion::cli::ProblemFile;
use feasregion::imputation::{impute, LossSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/case2.json"))?;
    let p = ProblemFile::parse(&text)?.instance(None)?;
    for loss in [
        LossSpec::Adjacency,
        LossSpec::Fairness,
        LossSpec::compactness(),
        LossSpec::combined(vec![LossSpec::Fairness, LossSpec::Adjacency]),
    ] {
        let t = std::time::Instant::now();
        let r = impute(&p, &loss)?;
        println!(
            "{:<12} stages {:?} forward optimum {:?} ({:.1?})",
            loss.name(),
            r.stage_values,
            r.verification.forward_optimum,
            t.elapsed()
        );
    }
    Ok(())
}
