use serde::{Deserialize, Serialize};

use crate::polyhedra::ConstraintRow;

/// Default slack allowed on earlier stages of a combined loss.
pub const DEFAULT_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    L1,
    #[default]
    L2,
}

/// Prior guess of the unknown rows, `A x ≥ b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prior {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl Prior {
    pub fn from_rows(rows: &[ConstraintRow]) -> Self {
        Prior {
            a: rows.iter().map(|r| r.a.clone()).collect(),
            b: rows.iter().map(|r| r.b).collect(),
        }
    }

    pub fn rows(&self) -> Vec<ConstraintRow> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(a, &b)| ConstraintRow::new(a.clone(), b))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }
}

/// Which loss shapes the imputed rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LossSpec {
    /// Stay close to a prior guess, row by row.
    Adherence {
        prior: Prior,
        /// Per-row weights; all 1 when absent.
        #[serde(default)]
        weights: Option<Vec<f64>>,
        #[serde(default)]
        distance: Distance,
    },
    /// Any valid rows; the closed form repeats the cost half-space.
    Indifference,
    /// Minimize the total slack of all observations in every row.
    Adjacency,
    /// Make the total slack `d_k = Σ_i d_ik` equal across observations.
    Fairness,
    /// Keep every observation close to its nearest row.
    Compactness {
        #[serde(default)]
        big_m: Option<f64>,
    },
    /// Optimize the losses in order, keeping each earlier optimum within
    /// `epsilon`.
    Combined {
        sequence: Vec<LossSpec>,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl LossSpec {
    pub fn compactness() -> Self {
        LossSpec::Compactness { big_m: None }
    }

    pub fn combined(sequence: Vec<LossSpec>) -> Self {
        LossSpec::Combined {
            sequence,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossSpec::Adherence { .. } => "adherence",
            LossSpec::Indifference => "indifference",
            LossSpec::Adjacency => "adjacency",
            LossSpec::Fairness => "fairness",
            LossSpec::Compactness { .. } => "compactness",
            LossSpec::Combined { .. } => "combined",
        }
    }
}
