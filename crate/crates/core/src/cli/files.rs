//! JSON documents read and written by the command line.

use serde::{Deserialize, Serialize};

use crate::forward::VerificationReport;
use crate::imputation::{
    assemble_region, ImputeError, ImputedRegion, LossSpec, ProblemInstance, RowDiagnostics, SideConstraint,
};
use crate::polyhedra::{ConstraintRow, GeometryError, Normalization, NormalizationTag, Polyhedron};

/// Known rows `Gx ≥ h`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnownRows {
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub c: Vec<f64>,
    pub observations: Vec<Vec<f64>>,
    #[serde(default)]
    pub known: KnownRows,
    pub m1: usize,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossSpec>,
    /// Recorded for reproducibility; every solver path is deterministic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub side_constraints: Vec<SideConstraint>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn known_polyhedron(&self) -> Result<Polyhedron, GeometryError> {
        if self.c.len() != self.n {
            return Err(GeometryError::DimensionMismatch {
                expected: self.n,
                found: self.c.len(),
            });
        }
        Polyhedron::from_matrix(self.n, &self.known.g, &self.known.h)
    }

    /// The validated instance, with `m1` replaced when given.
    pub fn instance(&self, m1: Option<usize>) -> Result<ProblemInstance, ImputeError> {
        let p = ProblemInstance::new(
            self.c.clone(),
            self.observations.clone(),
            self.known_polyhedron()?,
            m1.unwrap_or(self.m1),
            self.normalization,
        )?;
        if self.side_constraints.is_empty() {
            Ok(p)
        } else {
            p.with_side_constraints(self.side_constraints.clone())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionDiagnostics {
    pub loss: String,
    pub stage_values: Vec<f64>,
    /// Scale tag of each imputed row.
    pub tags: Vec<NormalizationTag>,
    pub rows: Vec<RowDiagnostics>,
}

/// Imputed rows `Ax ≥ b`, the known set `S`, and how they were found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(rename = "S")]
    pub s: Polyhedron,
    pub loss_value: f64,
    pub diagnostics: RegionDiagnostics,
    pub verification: VerificationReport,
}

impl RegionFile {
    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).unwrap_or_default();
        s.push('\n');
        s
    }

    pub fn from_imputed(r: &ImputedRegion) -> Self {
        RegionFile {
            a: r.imputed_rows.iter().map(|row| row.a.clone()).collect(),
            b: r.imputed_rows.iter().map(|row| row.b).collect(),
            s: r.known_set.clone(),
            loss_value: r.loss_value,
            diagnostics: RegionDiagnostics {
                loss: r.loss.clone(),
                stage_values: r.stage_values.clone(),
                tags: r.imputed_rows.iter().map(|row| row.tag).collect(),
                rows: r.diagnostics.clone(),
            },
            verification: r.verification.clone(),
        }
    }

    pub fn to_imputed(&self) -> Result<ImputedRegion, GeometryError> {
        let rows = self.rows()?;
        Ok(ImputedRegion {
            imputed_rows: rows,
            known_set: self.s.clone(),
            loss: self.diagnostics.loss.clone(),
            loss_value: self.loss_value,
            stage_values: self.diagnostics.stage_values.clone(),
            diagnostics: self.diagnostics.rows.clone(),
            verification: self.verification.clone(),
        })
    }

    /// Imputed rows; checks that `A`, `b` and the tags line up with `S`.
    pub fn rows(&self) -> Result<Vec<ConstraintRow>, GeometryError> {
        let m = self.a.len();
        if self.b.len() != m {
            return Err(GeometryError::DimensionMismatch {
                expected: m,
                found: self.b.len(),
            });
        }
        if self.diagnostics.tags.len() != m {
            return Err(GeometryError::DimensionMismatch {
                expected: m,
                found: self.diagnostics.tags.len(),
            });
        }
        let rows: Vec<ConstraintRow> = self
            .a
            .iter()
            .zip(&self.b)
            .zip(&self.diagnostics.tags)
            .map(|((a, &b), &tag)| ConstraintRow { a: a.clone(), b, tag })
            .collect();
        Polyhedron::new(self.s.n, rows.clone())?;
        self.s.check()?;
        Ok(rows)
    }

    /// `S` followed by the imputed rows.
    pub fn polyhedron(&self) -> Result<Polyhedron, GeometryError> {
        Ok(assemble_region(&self.rows()?, &self.s))
    }
}
