//! Diet recommendation study: daily servings of foods are the observations,
//! nutrient limits are the known rows, and imputed rows stand in for the
//! unstated preferences that kept people eating what they ate.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::forward::{solve_forward, verify_imputation, ForwardError, ForwardProblem, VerificationReport};
use crate::imputation::{impute, ImputeError, LossSpec, ProblemInstance};
use crate::polyhedra::{ConstraintRow, Normalization, Polyhedron};
use crate::solver::{SolveStatus, FEASIBILITY_TOL};

/// Rows imputed when no count is given.
pub const DEFAULT_M1: usize = 30;

/// Columns of the synthetic nutrient matrix with their per-serving ranges.
const SYNTHETIC_NUTRIENTS: [(&str, f64, f64); 8] = [
    ("carbohydrates", 0.0, 60.0),
    ("fiber", 0.0, 10.0),
    ("calories", 20.0, 400.0),
    ("fat", 0.0, 25.0),
    ("sugar", 0.0, 30.0),
    ("cholesterol", 0.0, 100.0),
    ("protein", 0.0, 30.0),
    ("sodium", 0.0, 800.0),
];
const SYNTHETIC_LOWER: [&str; 3] = ["carbohydrates", "fiber", "calories"];
const SYNTHETIC_UPPER: [&str; 4] = ["fat", "sugar", "cholesterol", "calories"];

#[derive(Debug, thiserror::Error)]
pub enum DietError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(String),
    #[error("bounds config: {0}")]
    Bounds(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("negative servings {value} of {food} on day {day}")]
    NegativeServings { day: usize, food: String, value: f64 },
    #[error("day {day} violates the {kind} bound on {nutrient}: {value} vs limit {limit}")]
    BoundViolated {
        nutrient: String,
        kind: BoundKind,
        day: usize,
        value: f64,
        limit: f64,
    },
    #[error("nutrient column {0:?} is required for this objective")]
    MissingNutrient(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Impute(#[from] ImputeError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lower,
    Upper,
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundKind::Lower => "lower",
            BoundKind::Upper => "upper",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    /// Minimize the negated protein total.
    MaxProtein,
    #[default]
    MinSodium,
}

impl std::str::FromStr for ObjectiveKind {
    type Err = DietError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max-protein" => Ok(ObjectiveKind::MaxProtein),
            "min-sodium" => Ok(ObjectiveKind::MinSodium),
            _ => Err(DietError::InvalidArgument(format!(
                "unknown objective {s:?}; expected max-protein or min-sodium"
            ))),
        }
    }
}

/// Limits on one nutrient; at least one side is set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NutrientBound {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

/// Bounds file: nutrient name to its limits, plus an optional cap on the
/// total number of servings per day.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_total_servings: Option<f64>,
    #[serde(flatten)]
    pub nutrients: BTreeMap<String, NutrientBound>,
}

/// A bound widened to the observed extreme in auto-relax mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relaxation {
    pub nutrient: String,
    pub kind: BoundKind,
    pub from: f64,
    pub to: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadOptions {
    pub objective: ObjectiveKind,
    /// Widen violated bounds instead of failing.
    pub auto_relax: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DietDataset {
    pub foods: Vec<String>,
    pub nutrients: Vec<String>,
    /// `K × n` servings per day.
    pub observations: Vec<Vec<f64>>,
    /// `n × p` amount of each nutrient per serving.
    pub nutrient_matrix: Vec<Vec<f64>>,
    pub bounds: BoundsConfig,
    pub objective_kind: ObjectiveKind,
    #[serde(default)]
    pub relaxations: Vec<Relaxation>,
}

fn read_path(path: &Path) -> Result<String, DietError> {
    fs::read_to_string(path).map_err(|source| DietError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_cell(s: &str, what: impl FnOnce() -> String) -> Result<f64, DietError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| DietError::Csv(format!("{}: not a finite number: {s:?}", what())))
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r)
}

fn parse_observations<R: Read>(r: R) -> Result<(Vec<String>, Vec<Vec<f64>>), DietError> {
    let mut rdr = csv_reader(r);
    let foods: Vec<String> = rdr
        .headers()
        .map_err(|e| DietError::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (day, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| DietError::Csv(format!("observations: {e}")))?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, s)| parse_cell(s, || format!("observations day {day}, column {j}")))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((foods, rows))
}

fn parse_nutrients<R: Read>(r: R) -> Result<(Vec<String>, Vec<String>, Vec<Vec<f64>>), DietError> {
    let mut rdr = csv_reader(r);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| DietError::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 2 {
        return Err(DietError::Schema("nutrients header needs a food column and at least one nutrient".into()));
    }
    let mut foods = Vec::new();
    let mut matrix = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| DietError::Csv(format!("nutrients: {e}")))?;
        let mut cells = rec.iter();
        foods.push(cells.next().unwrap_or_default().to_string());
        let row = cells
            .enumerate()
            .map(|(j, s)| parse_cell(s, || format!("nutrients row {i}, column {}", j + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        matrix.push(row);
    }
    Ok((header[1..].to_vec(), foods, matrix))
}

/// Reads and validates a dataset from its three files.
pub fn load_dataset(
    observations_csv: &Path,
    nutrients_csv: &Path,
    bounds_config: &Path,
    opts: &LoadOptions,
) -> Result<DietDataset, DietError> {
    let obs = read_path(observations_csv)?;
    let nut = read_path(nutrients_csv)?;
    let bounds = read_path(bounds_config)?;
    load_dataset_from_str(&obs, &nut, &bounds, opts)
}

/// Same as [`load_dataset`] with the file contents given directly.
pub fn load_dataset_from_str(
    observations_csv: &str,
    nutrients_csv: &str,
    bounds_json: &str,
    opts: &LoadOptions,
) -> Result<DietDataset, DietError> {
    let (foods, observations) = parse_observations(observations_csv.as_bytes())?;
    let (nutrients, nutrient_foods, nutrient_matrix) = parse_nutrients(nutrients_csv.as_bytes())?;
    if foods != nutrient_foods {
        return Err(DietError::Schema(format!(
            "observation columns {foods:?} do not match nutrient rows {nutrient_foods:?}"
        )));
    }
    let bounds: BoundsConfig = serde_json::from_str(bounds_json).map_err(|e| DietError::Bounds(e.to_string()))?;
    DietDataset::new(foods, nutrients, observations, nutrient_matrix, bounds, opts)
}

impl DietDataset {
    /// Validates shapes, servings and bounds. In auto-relax mode every
    /// violated bound is widened to the observed extreme and logged.
    pub fn new(
        foods: Vec<String>,
        nutrients: Vec<String>,
        observations: Vec<Vec<f64>>,
        nutrient_matrix: Vec<Vec<f64>>,
        mut bounds: BoundsConfig,
        opts: &LoadOptions,
    ) -> Result<Self, DietError> {
        let n = foods.len();
        if n == 0 {
            return Err(DietError::Schema("no foods".into()));
        }
        if observations.is_empty() {
            return Err(DietError::Schema("no observations".into()));
        }
        for (day, row) in observations.iter().enumerate() {
            if row.len() != n {
                return Err(DietError::Schema(format!("day {day} has {} entries for {n} foods", row.len())));
            }
            if let Some((j, &v)) = row.iter().enumerate().find(|(_, &v)| v < 0.0) {
                return Err(DietError::NegativeServings {
                    day,
                    food: foods[j].clone(),
                    value: v,
                });
            }
        }
        if nutrient_matrix.len() != n {
            return Err(DietError::Schema(format!("{} nutrient rows for {n} foods", nutrient_matrix.len())));
        }
        if let Some((i, r)) = nutrient_matrix.iter().enumerate().find(|(_, r)| r.len() != nutrients.len()) {
            return Err(DietError::Schema(format!(
                "nutrient row {i} has {} entries for {} nutrients",
                r.len(),
                nutrients.len()
            )));
        }
        for (name, b) in &bounds.nutrients {
            if !nutrients.contains(name) {
                return Err(DietError::Bounds(format!("unknown nutrient {name:?}")));
            }
            if b.lower.is_none() && b.upper.is_none() {
                return Err(DietError::Bounds(format!("{name:?} has neither lower nor upper")));
            }
            if b.lower.into_iter().chain(b.upper).any(|v| !v.is_finite()) {
                return Err(DietError::Bounds(format!("{name:?} has a non-finite limit")));
            }
        }
        let mut ds = DietDataset {
            foods,
            nutrients,
            observations,
            nutrient_matrix,
            bounds: BoundsConfig::default(),
            objective_kind: opts.objective,
            relaxations: Vec::new(),
        };
        let totals: Vec<f64> = ds.observations.iter().map(|x| x.iter().sum()).collect();
        if let Some(cap) = bounds.max_total_servings {
            let (day, worst) = arg_extreme(&totals, BoundKind::Upper);
            if worst > cap + FEASIBILITY_TOL {
                bounds.max_total_servings = Some(ds.relax(opts, "total_servings", BoundKind::Upper, day, worst, cap)?);
            }
        }
        for (name, b) in bounds.nutrients.iter_mut() {
            let j = ds.nutrient_index(name).unwrap_or_default();
            let values: Vec<f64> = ds.observations.iter().map(|x| ds.intake(x, j)).collect();
            if let Some(lo) = b.lower {
                let (day, worst) = arg_extreme(&values, BoundKind::Lower);
                if worst < lo - FEASIBILITY_TOL {
                    b.lower = Some(ds.relax(opts, name, BoundKind::Lower, day, worst, lo)?);
                }
            }
            if let Some(hi) = b.upper {
                let (day, worst) = arg_extreme(&values, BoundKind::Upper);
                if worst > hi + FEASIBILITY_TOL {
                    b.upper = Some(ds.relax(opts, name, BoundKind::Upper, day, worst, hi)?);
                }
            }
        }
        ds.bounds = bounds;
        Ok(ds)
    }

    fn relax(
        &mut self,
        opts: &LoadOptions,
        nutrient: &str,
        kind: BoundKind,
        day: usize,
        value: f64,
        limit: f64,
    ) -> Result<f64, DietError> {
        if !opts.auto_relax {
            return Err(DietError::BoundViolated {
                nutrient: nutrient.to_string(),
                kind,
                day,
                value,
                limit,
            });
        }
        log::warn!("relaxing {kind} bound on {nutrient} from {limit} to {value} (day {day})");
        self.relaxations.push(Relaxation {
            nutrient: nutrient.to_string(),
            kind,
            from: limit,
            to: value,
        });
        Ok(value)
    }

    pub fn n(&self) -> usize {
        self.foods.len()
    }

    pub fn k(&self) -> usize {
        self.observations.len()
    }

    pub fn nutrient_index(&self, name: &str) -> Option<usize> {
        self.nutrients.iter().position(|n| n.eq_ignore_ascii_case(name))
    }

    /// Amount of nutrient `j` in the daily servings `x`.
    pub fn intake(&self, x: &[f64], j: usize) -> f64 {
        x.iter().zip(&self.nutrient_matrix).map(|(s, row)| s * row[j]).sum()
    }

    fn column(&self, j: usize) -> Vec<f64> {
        self.nutrient_matrix.iter().map(|r| r[j]).collect()
    }

    /// Cost of the forward problem for the chosen objective.
    pub fn cost_vector(&self) -> Result<Vec<f64>, DietError> {
        let (name, sign) = match self.objective_kind {
            ObjectiveKind::MaxProtein => ("protein", -1.0),
            ObjectiveKind::MinSodium => ("sodium", 1.0),
        };
        let j = self
            .nutrient_index(name)
            .ok_or_else(|| DietError::MissingNutrient(name.to_string()))?;
        Ok(self.column(j).into_iter().map(|v| sign * v).collect())
    }

    /// Nutrient bounds, the total-servings cap and `x ≥ 0`, as rows `Gx ≥ h`.
    pub fn known_rows(&self) -> Polyhedron {
        let n = self.n();
        let mut rows = Vec::new();
        for (name, b) in &self.bounds.nutrients {
            let col = self.column(self.nutrient_index(name).unwrap_or_default());
            if let Some(lo) = b.lower {
                rows.push(ConstraintRow::new(col.clone(), lo));
            }
            if let Some(hi) = b.upper {
                rows.push(ConstraintRow::le(col, hi));
            }
        }
        if let Some(cap) = self.bounds.max_total_servings {
            rows.push(ConstraintRow::le(vec![1.0; n], cap));
        }
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            rows.push(ConstraintRow::new(e, 0.0));
        }
        Polyhedron { n, rows }
    }

    /// Inverse problem over this dataset with `m1` unknown rows.
    pub fn problem(&self, m1: usize) -> Result<ProblemInstance, DietError> {
        Ok(ProblemInstance::new(
            self.cost_vector()?,
            self.observations.clone(),
            self.known_rows(),
            m1,
            Normalization::SumProxy,
        )?)
    }
}

fn arg_extreme(values: &[f64], kind: BoundKind) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (i, &v) in values.iter().enumerate() {
        let worse = match kind {
            BoundKind::Lower => v < best.1,
            BoundKind::Upper => v > best.1,
        };
        if worse {
            best = (i, v);
        }
    }
    best
}

/// `(1/K) Σ_k ‖x^k − x‖₁`.
pub fn avg_l1_distance(points: &[Vec<f64>], x: &[f64]) -> f64 {
    debug_assert!(points.iter().all(|p| p.len() == x.len()));
    if points.is_empty() {
        return 0.0;
    }
    let total: f64 = points
        .iter()
        .map(|p| p.iter().zip(x).map(|(a, b)| (a - b).abs()).sum::<f64>())
        .sum();
    total / points.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoodComparison {
    pub food: String,
    pub observed_mean: f64,
    pub without_mio: f64,
    pub with_mio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyReport {
    pub objective: ObjectiveKind,
    pub m1: usize,
    pub loss: String,
    pub loss_value: f64,
    pub stage_values: Vec<f64>,
    pub diet_without_mio: Vec<f64>,
    pub diet_with_mio: Vec<f64>,
    pub objective_without_mio: f64,
    pub objective_with_mio: f64,
    pub avg_l1_without: f64,
    pub avg_l1_with: f64,
    pub foods: Vec<FoodComparison>,
    pub imputed_rows: Vec<ConstraintRow>,
    pub relaxations: Vec<Relaxation>,
    pub verification: VerificationReport,
}

impl CaseStudyReport {
    /// Per-food table as CSV.
    pub fn to_csv(&self) -> Result<String, DietError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| DietError::Csv(e.to_string());
        w.write_record(["food", "observed_mean", "without_mio", "with_mio"]).map_err(err)?;
        for f in &self.foods {
            w.write_record([
                f.food.clone(),
                f.observed_mean.to_string(),
                f.without_mio.to_string(),
                f.with_mio.to_string(),
            ])
            .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| DietError::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| DietError::Csv(e.to_string()))
    }

    /// Both distances side by side, one line each.
    pub fn summary_table(&self) -> String {
        format!(
            "{:<12} {:>14} {:>14}\n{:<12} {:>14.6} {:>14.6}\n{:<12} {:>14.6} {:>14.6}\n",
            "diet",
            "objective",
            "avg_l1",
            "without_mio",
            self.objective_without_mio,
            self.avg_l1_without,
            "with_mio",
            self.objective_with_mio,
            self.avg_l1_with,
        )
    }
}

fn forward_point(c: &[f64], region: Polyhedron, what: &str) -> Result<(Vec<f64>, f64), DietError> {
    let res = solve_forward(&ForwardProblem::new(c.to_vec(), region)?)?;
    match (res.status, res.solution, res.objective_value) {
        (SolveStatus::Optimal, Some(x), Some(v)) => Ok((x, v)),
        (status, _, _) => Err(DietError::Inconsistent(format!(
            "forward problem {what} returned {status:?} although every observation is feasible"
        ))),
    }
}

/// Imputes `m1` rows with `loss`, then solves the diet problem over the
/// known rows alone and over known plus imputed rows.
pub fn run_case_study(ds: &DietDataset, m1: usize, loss: &LossSpec) -> Result<CaseStudyReport, DietError> {
    let p = ds.problem(m1)?;
    let imputed = impute(&p, loss)?;
    let c = &p.c;
    let (without, obj_without) = forward_point(c, ds.known_rows(), "without imputed rows")?;
    let region = imputed.region();
    let (with, obj_with) = forward_point(c, region.clone(), "with imputed rows")?;
    let verification = verify_imputation(&region, &p.obs, c)?;
    let k = ds.k() as f64;
    let foods = ds
        .foods
        .iter()
        .enumerate()
        .map(|(j, f)| FoodComparison {
            food: f.clone(),
            observed_mean: ds.observations.iter().map(|x| x[j]).sum::<f64>() / k,
            without_mio: without[j],
            with_mio: with[j],
        })
        .collect();
    Ok(CaseStudyReport {
        objective: ds.objective_kind,
        m1,
        loss: imputed.loss.clone(),
        loss_value: imputed.loss_value,
        stage_values: imputed.stage_values.clone(),
        avg_l1_without: avg_l1_distance(&ds.observations, &without),
        avg_l1_with: avg_l1_distance(&ds.observations, &with),
        objective_without_mio: obj_without,
        objective_with_mio: obj_with,
        diet_without_mio: without,
        diet_with_mio: with,
        foods,
        imputed_rows: imputed.imputed_rows,
        relaxations: ds.relaxations.clone(),
        verification,
    })
}

/// Default loss of the study: fairness first, compactness second.
pub fn default_loss() -> LossSpec {
    LossSpec::combined(vec![LossSpec::Fairness, LossSpec::compactness()])
}

fn round_to(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

/// Draws a dataset with `n` foods and `k` days. Each food is eaten on a
/// fraction of days drawn from `[0.2, 1.0]` and scaled by `1 − sparsity`,
/// with a mean serving size in `[0.2, 5.0]`. Bounds are the observed
/// envelope, so every day satisfies them.
pub fn generate_synthetic_dataset(seed: u64, n: usize, k: usize, sparsity: f64) -> Result<DietDataset, DietError> {
    if n < 2 || k < 2 {
        return Err(DietError::InvalidArgument(format!("need n >= 2 and K >= 2, got n = {n}, K = {k}")));
    }
    if !(0.0..1.0).contains(&sparsity) {
        return Err(DietError::InvalidArgument(format!("sparsity must lie in [0, 1), got {sparsity}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let foods: Vec<String> = (0..n).map(|j| format!("food_{j:02}")).collect();
    let nutrients: Vec<String> = SYNTHETIC_NUTRIENTS.iter().map(|(s, _, _)| s.to_string()).collect();
    let nutrient_matrix: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            SYNTHETIC_NUTRIENTS
                .iter()
                .map(|&(_, lo, hi)| round_to(rng.gen_range(lo..=hi), 0.1))
                .collect()
        })
        .collect();
    let mut observations = vec![vec![0.0; n]; k];
    let mut days: Vec<usize> = (0..k).collect();
    for j in 0..n {
        let share = rng.gen_range(0.2..=1.0) * (1.0 - sparsity);
        let count = ((share * k as f64).round() as usize).clamp(1, k);
        let mean = rng.gen_range(0.2..=5.0);
        days.shuffle(&mut rng);
        for &d in &days[..count] {
            let v = round_to(mean * rng.gen_range(0.5..=1.5), 0.1);
            observations[d][j] = v.max(0.1);
        }
    }
    let mut ds = DietDataset {
        foods,
        nutrients,
        observations,
        nutrient_matrix,
        bounds: BoundsConfig::default(),
        objective_kind: ObjectiveKind::default(),
        relaxations: Vec::new(),
    };
    let mut bounds = BoundsConfig::default();
    for name in SYNTHETIC_LOWER.iter().chain(SYNTHETIC_UPPER.iter()) {
        let j = ds.nutrient_index(name).unwrap_or_default();
        let values: Vec<f64> = ds.observations.iter().map(|x| ds.intake(x, j)).collect();
        let entry = bounds.nutrients.entry(name.to_string()).or_default();
        if SYNTHETIC_LOWER.contains(name) {
            entry.lower = Some(arg_extreme(&values, BoundKind::Lower).1);
        }
        if SYNTHETIC_UPPER.contains(name) {
            entry.upper = Some(arg_extreme(&values, BoundKind::Upper).1);
        }
    }
    let totals: Vec<f64> = ds.observations.iter().map(|x| x.iter().sum()).collect();
    bounds.max_total_servings = Some(arg_extreme(&totals, BoundKind::Upper).1);
    ds.bounds = bounds;
    Ok(ds)
}

/// Paths written by [`write_dataset`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetFiles {
    pub observations: PathBuf,
    pub nutrients: PathBuf,
    pub bounds: PathBuf,
}

fn csv_string(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> Result<String, DietError> {
    let err = |e: csv::Error| DietError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| DietError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| DietError::Csv(e.to_string()))
}

impl DietDataset {
    /// The three file contents: observations CSV, nutrients CSV, bounds JSON.
    pub fn to_file_contents(&self) -> Result<(String, String, String), DietError> {
        let obs = csv_string(
            self.foods.clone(),
            self.observations.iter().map(|r| r.iter().map(f64::to_string).collect()),
        )?;
        let mut header = vec!["food".to_string()];
        header.extend(self.nutrients.iter().cloned());
        let nut = csv_string(
            header,
            self.foods.iter().zip(&self.nutrient_matrix).map(|(f, r)| {
                let mut cells = vec![f.clone()];
                cells.extend(r.iter().map(f64::to_string));
                cells
            }),
        )?;
        let mut bounds = serde_json::to_string_pretty(&self.bounds).map_err(|e| DietError::Bounds(e.to_string()))?;
        bounds.push('\n');
        Ok((obs, nut, bounds))
    }
}

/// Writes `observations.csv`, `nutrients.csv` and `bounds.json` into `dir`.
pub fn write_dataset(ds: &DietDataset, dir: &Path) -> Result<DatasetFiles, DietError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| DietError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let files = DatasetFiles {
        observations: dir.join("observations.csv"),
        nutrients: dir.join("nutrients.csv"),
        bounds: dir.join("bounds.json"),
    };
    let (obs, nut, bounds) = ds.to_file_contents()?;
    fs::write(&files.observations, obs).map_err(io(&files.observations))?;
    fs::write(&files.nutrients, nut).map_err(io(&files.nutrients))?;
    fs::write(&files.bounds, bounds).map_err(io(&files.bounds))?;
    Ok(files)
}
