//! Command-line front end: `infer`, `verify`, `forward` and `diet`.
//!
//! Exit codes: 0 success, 1 bad input, 2 solver failure, 3 verification
//! failure.

mod files;
mod svg;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::diet::{self, DietError, LoadOptions, ObjectiveKind};
use crate::forward::{solve_forward, verify_imputation, ForwardError, ForwardProblem};
use crate::imputation::{impute, ImputeError, LossSpec, ProblemInstance};
use crate::polyhedra::{is_valid_set, GeometryError, Polyhedron};
use crate::solver::SolverError;

pub use files::{KnownRows, ProblemFile, RegionDiagnostics, RegionFile};
pub use svg::render_region_svg;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::DimensionMismatch(_) | SolverError::InvalidModel(_) => CliError::Input(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<ForwardError> for CliError {
    fn from(e: ForwardError) -> Self {
        match e {
            ForwardError::Geometry(g) => g.into(),
            ForwardError::Solver(s) => s.into(),
            ForwardError::NegativeRadius(_) => CliError::Input(e.to_string()),
        }
    }
}

impl From<ImputeError> for CliError {
    fn from(e: ImputeError) -> Self {
        match e {
            ImputeError::Geometry(g) => g.into(),
            ImputeError::Forward(f) => f.into(),
            ImputeError::InvalidInstance(_) | ImputeError::InvalidLoss(_) => CliError::Input(e.to_string()),
            ImputeError::VerificationFailed(report) => CliError::Verification(format!(
                "imputed region failed verification\n{}",
                serde_json::to_string_pretty(&report).unwrap_or_default()
            )),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<DietError> for CliError {
    fn from(e: DietError) -> Self {
        match e {
            DietError::Impute(i) => i.into(),
            DietError::Forward(f) => f.into(),
            DietError::Inconsistent(_) => CliError::Solver(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "feasregion", version, about = "Impute the unknown constraints of a linear program from feasible observations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Impute rows for a problem file and write a region file.
    Infer(InferArgs),
    /// Check a region against the observations and cost of a problem.
    Verify(VerifyArgs),
    /// Solve min c'x over a region (or over the known rows alone).
    Forward(ForwardArgs),
    /// Run the diet study on CSV data or on a synthetic dataset.
    Diet(DietArgs),
}

#[derive(Debug, Args)]
struct InferArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Loss name (indifference, adjacency, fairness, compactness) or a JSON
    /// loss object; defaults to the loss in the problem file.
    #[arg(long)]
    loss: Option<String>,
    /// Further losses, optimized after the primary one.
    #[arg(long)]
    secondary: Vec<String>,
    #[arg(long)]
    m1: Option<usize>,
    /// Region file to write; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG file for a 2-D problem.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    region: PathBuf,
    #[arg(long)]
    problem: PathBuf,
}

#[derive(Debug, Args)]
struct ForwardArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    region: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DietArgs {
    #[arg(long, required_unless_present = "synthetic")]
    observations: Option<PathBuf>,
    #[arg(long, required_unless_present = "synthetic")]
    nutrients: Option<PathBuf>,
    #[arg(long, required_unless_present = "synthetic")]
    bounds: Option<PathBuf>,
    /// Generate the dataset from this seed instead of reading files.
    #[arg(long, conflicts_with_all = ["observations", "nutrients", "bounds"])]
    synthetic: Option<u64>,
    #[arg(long, default_value_t = 26)]
    foods: usize,
    #[arg(long, default_value_t = 100)]
    days: usize,
    #[arg(long, default_value_t = 0.0)]
    sparsity: f64,
    /// Directory to write the synthetic dataset files into.
    #[arg(long, requires = "synthetic")]
    write_dataset: Option<PathBuf>,
    /// max-protein or min-sodium.
    #[arg(long, default_value = "min-sodium")]
    objective: String,
    #[arg(long, default_value_t = diet::DEFAULT_M1)]
    m1: usize,
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    secondary: Vec<String>,
    /// Widen bounds violated by the observations instead of failing.
    #[arg(long)]
    auto_relax: bool,
    /// Report JSON to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-food comparison CSV to write.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Infer(a) => cmd_infer(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Forward(a) => cmd_forward(&a),
        Command::Diet(a) => cmd_diet(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_problem(path: &Path) -> Result<ProblemFile, CliError> {
    ProblemFile::parse(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_region(path: &Path) -> Result<RegionFile, CliError> {
    RegionFile::parse(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// A loss from its name or from a JSON object.
pub fn parse_loss(s: &str) -> Result<LossSpec, CliError> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| CliError::Input(format!("loss: {e}")));
    }
    match s {
        "indifference" => Ok(LossSpec::Indifference),
        "adjacency" => Ok(LossSpec::Adjacency),
        "fairness" => Ok(LossSpec::Fairness),
        "compactness" => Ok(LossSpec::compactness()),
        "adherence" => Err(CliError::Input(
            "adherence needs a prior; pass a JSON loss object or put it in the problem file".into(),
        )),
        _ => Err(CliError::Input(format!("unknown loss {s:?}"))),
    }
}

fn choose_loss(primary: Option<&str>, secondary: &[String], default: Option<LossSpec>) -> Result<LossSpec, CliError> {
    let first = match primary {
        Some(s) => parse_loss(s)?,
        None => default.ok_or_else(|| CliError::Input("no loss given: use --loss or set \"loss\" in the problem file".into()))?,
    };
    if secondary.is_empty() {
        return Ok(first);
    }
    let mut sequence = match first {
        LossSpec::Combined { sequence, .. } => sequence,
        other => vec![other],
    };
    for s in secondary {
        sequence.push(parse_loss(s)?);
    }
    Ok(LossSpec::combined(sequence))
}

fn plot(path: &Path, p: &ProblemInstance, known_set: &Polyhedron, rows: &[crate::polyhedra::ConstraintRow]) -> Result<(), CliError> {
    if p.n != 2 {
        return Err(CliError::Input(format!("plotting needs n = 2, got n = {}", p.n)));
    }
    let svg = render_region_svg(&p.obs.points, p.obs.preferred_index, known_set, rows)?;
    write(path, &svg)
}

fn cmd_infer(a: &InferArgs) -> Result<(), CliError> {
    let pf = load_problem(&a.problem)?;
    let p = pf.instance(a.m1)?;
    let loss = choose_loss(a.loss.as_deref(), &a.secondary, pf.loss.clone())?;
    let r = impute(&p, &loss)?;
    let text = RegionFile::from_imputed(&r).render();
    match &a.out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(path) = &a.plot {
        plot(path, &p, &r.known_set, &r.imputed_rows)?;
    }
    if r.verification.all_ok() {
        Ok(())
    } else {
        Err(CliError::Verification("imputed region failed verification".into()))
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let pf = load_problem(&a.problem)?;
    let rf = load_region(&a.region)?;
    let region = rf.polyhedron()?;
    if region.n != pf.n {
        return Err(CliError::Input(format!("region has n = {} but the problem has n = {}", region.n, pf.n)));
    }
    let obs = crate::polyhedra::ObservationSet::new(pf.observations.clone(), &pf.c)?;
    let report = verify_imputation(&region, &obs, &pf.c)?;
    let validity = is_valid_set(&region, &obs)?;
    let out = serde_json::json!({
        "verification": report,
        "violations": validity.violations,
    });
    println!("{}", serde_json::to_string_pretty(&out).unwrap_or_default());
    if report.all_ok() {
        Ok(())
    } else {
        Err(CliError::Verification("region failed verification".into()))
    }
}

fn cmd_forward(a: &ForwardArgs) -> Result<(), CliError> {
    let pf = load_problem(&a.problem)?;
    let region = match &a.region {
        Some(path) => load_region(path)?.polyhedron()?,
        None => pf.known_polyhedron()?,
    };
    let res = solve_forward(&ForwardProblem::new(pf.c.clone(), region)?)?;
    println!("status: {:?}", res.status);
    if let (Some(v), Some(x)) = (res.objective_value, &res.solution) {
        println!("value: {v}");
        println!("x: {}", serde_json::to_string(x).unwrap_or_default());
    }
    Ok(())
}

fn cmd_diet(a: &DietArgs) -> Result<(), CliError> {
    let objective: ObjectiveKind = a.objective.parse().map_err(|e: DietError| CliError::Input(e.to_string()))?;
    let ds = match a.synthetic {
        Some(seed) => {
            let mut ds = diet::generate_synthetic_dataset(seed, a.foods, a.days, a.sparsity)?;
            ds.objective_kind = objective;
            if let Some(dir) = &a.write_dataset {
                diet::write_dataset(&ds, dir)?;
            }
            ds
        }
        None => {
            let opts = LoadOptions {
                objective,
                auto_relax: a.auto_relax,
            };
            let (Some(o), Some(n), Some(b)) = (&a.observations, &a.nutrients, &a.bounds) else {
                return Err(CliError::Input("--observations, --nutrients and --bounds are required".into()));
            };
            diet::load_dataset(o, n, b, &opts)?
        }
    };
    let loss = choose_loss(a.loss.as_deref(), &a.secondary, Some(diet::default_loss()))?;
    let report = diet::run_case_study(&ds, a.m1, &loss)?;
    if let Some(path) = &a.out {
        let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Input(e.to_string()))?;
        text.push('\n');
        write(path, &text)?;
    }
    if let Some(path) = &a.csv {
        write(path, &report.to_csv()?)?;
    }
    print!("{}", report.summary_table());
    if report.verification.all_ok() {
        Ok(())
    } else {
        Err(CliError::Verification("diet region failed verification".into()))
    }
}
