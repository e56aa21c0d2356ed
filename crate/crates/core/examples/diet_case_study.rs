//! Synthetic diet data: recommended diets with and without imputed rows.

use feasregion::diet::{default_loss, generate_synthetic_dataset, run_case_study, ObjectiveKind, DEFAULT_M1};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map_or(Ok(42), |s| s.parse())?;
    for objective in [ObjectiveKind::MinSodium, ObjectiveKind::MaxProtein] {
        let mut ds = generate_synthetic_dataset(seed, 26, 100, 0.0)?;
        ds.objective_kind = objective;
        let r = run_case_study(&ds, DEFAULT_M1, &default_loss())?;
        println!("seed {seed}, {objective:?}");
        print!("{}", r.summary_table());
    }
    Ok(())
}
