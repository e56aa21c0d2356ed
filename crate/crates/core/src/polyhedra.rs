//! Rows `a'x ≥ b`, stacks of rows, observation sets and the 2-D geometry used
//! by plots and tests.

use serde::{Deserialize, Serialize};

use crate::solver::{self, Relation, Row, SolveStatus, SolverModel, FEASIBILITY_TOL};

/// Scale convention that excludes the trivial row `a = 0` and rescaled
/// duplicates of the same half-space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `|Σ_j a_j| = 1`, linear once the sign `σ` of the sum is fixed.
    #[default]
    SumProxy,
    /// `Σ_j |a_j| = 1`, which needs sign binaries per coefficient.
    L1Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum NormalizationTag {
    SumProxy { sigma: i8 },
    L1Exact,
    None,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("cost vector is zero")]
    ZeroCost,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("row {a:?} has zero coefficient sum and cannot be sum-normalized; use l1-exact")]
    NormalizationDegenerate { a: Vec<f64> },
    #[error("row has an all-zero coefficient vector")]
    ZeroRow,
    #[error("observation set is empty")]
    EmptyObservations,
    #[error("region is empty")]
    EmptyRegion,
    #[error("region is unbounded; pass a viewport to clip it")]
    UnboundedRegion,
    #[error("operation needs n = 2, got n = {0}")]
    NotTwoDimensional(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// One inequality `a'x ≥ b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub a: Vec<f64>,
    pub b: f64,
    pub tag: NormalizationTag,
}

impl ConstraintRow {
    /// Untagged row `a'x ≥ b`.
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        ConstraintRow {
            a,
            b,
            tag: NormalizationTag::None,
        }
    }

    /// Untagged row `a'x ≤ b`, stored as `−a'x ≥ −b`.
    pub fn le(a: Vec<f64>, b: f64) -> Self {
        ConstraintRow::new(a.into_iter().map(|v| -v).collect(), -b)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `a'x − b`, negative when `x` violates the row.
    pub fn slack(&self, x: &[f64]) -> f64 {
        dot(&self.a, x) - self.b
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.slack(x) >= -tol
    }

    /// Distance of the coefficients from the tagged scale; 0 for untagged rows.
    pub fn normalization_error(&self) -> f64 {
        match self.tag {
            NormalizationTag::SumProxy { sigma } => (self.a.iter().sum::<f64>() - f64::from(sigma)).abs(),
            NormalizationTag::L1Exact => (self.a.iter().map(|v| v.abs()).sum::<f64>() - 1.0).abs(),
            NormalizationTag::None => 0.0,
        }
    }

    pub fn to_solver_row(&self) -> Row {
        Row::from_dense(&self.a, Relation::Ge, self.b)
    }
}

/// An H-representation `{x : a_i'x ≥ b_i for every row}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyhedron {
    pub n: usize,
    pub rows: Vec<ConstraintRow>,
}

impl Polyhedron {
    pub fn empty(n: usize) -> Self {
        Polyhedron { n, rows: Vec::new() }
    }

    pub fn new(n: usize, rows: Vec<ConstraintRow>) -> Result<Self, GeometryError> {
        let p = Polyhedron { n, rows };
        p.check()?;
        Ok(p)
    }

    /// Builds `{x : Gx ≥ h}` from a dense matrix.
    pub fn from_matrix(n: usize, g: &[Vec<f64>], h: &[f64]) -> Result<Self, GeometryError> {
        if g.len() != h.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: g.len(),
                found: h.len(),
            });
        }
        let rows = g
            .iter()
            .zip(h)
            .map(|(a, &b)| ConstraintRow::new(a.clone(), b))
            .collect();
        Polyhedron::new(n, rows)
    }

    pub fn check(&self) -> Result<(), GeometryError> {
        for r in &self.rows {
            if r.dim() != self.n {
                return Err(GeometryError::DimensionMismatch {
                    expected: self.n,
                    found: r.dim(),
                });
            }
            if r.a.iter().any(|v| !v.is_finite()) || !r.b.is_finite() {
                return Err(GeometryError::NonFinite("constraint row"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.rows.iter().all(|r| r.contains(x, tol))
    }

    /// Splits into `(G, h)`.
    pub fn to_matrix(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        (
            self.rows.iter().map(|r| r.a.clone()).collect(),
            self.rows.iter().map(|r| r.b).collect(),
        )
    }

    /// `self` followed by the rows of `other`.
    pub fn concat(&self, other: &Polyhedron) -> Polyhedron {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Polyhedron { n: self.n, rows }
    }
}

/// Observed feasible points and the index of the preferred one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    pub points: Vec<Vec<f64>>,
    pub preferred_index: usize,
}

impl ObservationSet {
    /// Picks the preferred point for the cost `c`.
    pub fn new(points: Vec<Vec<f64>>, c: &[f64]) -> Result<Self, GeometryError> {
        let preferred_index = preferred_observation(&points, c)?;
        Ok(ObservationSet {
            points,
            preferred_index,
        })
    }

    pub fn preferred(&self) -> &[f64] {
        &self.points[self.preferred_index]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Componentwise mean of the points.
    pub fn centroid(&self) -> Vec<f64> {
        let n = self.dim();
        let k = self.points.len() as f64;
        (0..n)
            .map(|j| self.points.iter().map(|p| p[j]).sum::<f64>() / k)
            .collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_cost(c: &[f64]) -> Result<(), GeometryError> {
    if c.iter().any(|v| !v.is_finite()) {
        return Err(GeometryError::NonFinite("cost vector"));
    }
    if c.iter().all(|&v| v == 0.0) {
        return Err(GeometryError::ZeroCost);
    }
    Ok(())
}

/// Index of the point with the smallest `c'x`, lowest index on ties.
pub fn preferred_observation(points: &[Vec<f64>], c: &[f64]) -> Result<usize, GeometryError> {
    check_cost(c)?;
    if points.is_empty() {
        return Err(GeometryError::EmptyObservations);
    }
    let mut best = (0usize, f64::INFINITY);
    for (k, p) in points.iter().enumerate() {
        if p.len() != c.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: c.len(),
                found: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite("observation"));
        }
        let v = dot(c, p);
        if v < best.1 {
            best = (k, v);
        }
    }
    Ok(best.0)
}

/// The row of `{x : c'x ≥ c'x0}` normalized under `scheme`.
pub fn half_space_of_cost(c: &[f64], x0: &[f64], scheme: Normalization) -> Result<ConstraintRow, GeometryError> {
    check_cost(c)?;
    if x0.len() != c.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: c.len(),
            found: x0.len(),
        });
    }
    normalize_row(&ConstraintRow::new(c.to_vec(), dot(c, x0)), scheme)
}

/// Rescales a row by a positive factor so it meets `scheme`. The half-space is
/// unchanged.
pub fn normalize_row(row: &ConstraintRow, scheme: Normalization) -> Result<ConstraintRow, GeometryError> {
    let l1: f64 = row.a.iter().map(|v| v.abs()).sum();
    if l1 == 0.0 {
        return Err(GeometryError::ZeroRow);
    }
    let (scale, tag) = match scheme {
        Normalization::SumProxy => {
            let s: f64 = row.a.iter().sum();
            if s.abs() <= 1e-12 * l1 {
                return Err(GeometryError::NormalizationDegenerate { a: row.a.clone() });
            }
            let sigma: i8 = if s > 0.0 { 1 } else { -1 };
            (1.0 / s.abs(), NormalizationTag::SumProxy { sigma })
        }
        Normalization::L1Exact => (1.0 / l1, NormalizationTag::L1Exact),
    };
    Ok(ConstraintRow {
        a: row.a.iter().map(|v| v * scale).collect(),
        b: row.b * scale,
        tag,
    })
}

/// `a'x − b` with a dimension check.
pub fn slack_distance(row: &ConstraintRow, x: &[f64]) -> Result<f64, GeometryError> {
    if row.dim() != x.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: row.dim(),
            found: x.len(),
        });
    }
    Ok(row.slack(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub row: usize,
    pub observation: usize,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub valid: bool,
    pub worst_violation: f64,
    pub violations: Vec<Violation>,
}

/// Checks that every observation satisfies every row within `1e-7`.
pub fn is_valid_set(p: &Polyhedron, obs: &ObservationSet) -> Result<ValidityReport, GeometryError> {
    p.check()?;
    let mut violations = Vec::new();
    let mut worst = 0.0_f64;
    for (k, x) in obs.points.iter().enumerate() {
        if x.len() != p.n {
            return Err(GeometryError::DimensionMismatch {
                expected: p.n,
                found: x.len(),
            });
        }
        for (i, r) in p.rows.iter().enumerate() {
            let s = r.slack(x);
            worst = worst.max(-s);
            if s < -FEASIBILITY_TOL {
                violations.push(Violation {
                    row: i,
                    observation: k,
                    amount: -s,
                });
            }
        }
    }
    Ok(ValidityReport {
        valid: violations.is_empty(),
        worst_violation: worst.max(0.0),
        violations,
    })
}

/// Axis-aligned clipping box for 2-D drawing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Viewport {
    /// Bounding box of `points` grown by `margin` times its extent on each side
    /// (an extent of zero counts as 1).
    pub fn around(points: &[Vec<f64>], margin: f64) -> Viewport {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            x0 = x0.min(p[0]);
            x1 = x1.max(p[0]);
            y0 = y0.min(p[1]);
            y1 = y1.max(p[1]);
        }
        let dx = if x1 > x0 { x1 - x0 } else { 1.0 };
        let dy = if y1 > y0 { y1 - y0 } else { 1.0 };
        Viewport {
            x_min: x0 - margin * dx,
            x_max: x1 + margin * dx,
            y_min: y0 - margin * dy,
            y_max: y1 + margin * dy,
        }
    }

    pub fn contains(&self, v: [f64; 2], tol: f64) -> bool {
        v[0] >= self.x_min - tol && v[0] <= self.x_max + tol && v[1] >= self.y_min - tol && v[1] <= self.y_max + tol
    }

    fn rows(&self) -> [ConstraintRow; 4] {
        [
            ConstraintRow::new(vec![1.0, 0.0], self.x_min),
            ConstraintRow::le(vec![1.0, 0.0], self.x_max),
            ConstraintRow::new(vec![0.0, 1.0], self.y_min),
            ConstraintRow::le(vec![0.0, 1.0], self.y_max),
        ]
    }
}

/// Polygon of a 2-D region, possibly cut to a viewport.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2d {
    /// Counter-clockwise vertex list.
    pub vertices: Vec<[f64; 2]>,
    /// The region extends past the viewport.
    pub clipped: bool,
}

fn is_nonempty(p: &Polyhedron) -> bool {
    let mut m = SolverModel::with_free_vars(p.n);
    for r in &p.rows {
        m.add_row(r.to_solver_row());
    }
    matches!(solver::solve_lp(&m).map(|r| r.status), Ok(SolveStatus::Optimal))
}

/// Bounded iff the recession cone `{d : a_i'd ≥ 0}` is `{0}`.
fn is_bounded(p: &Polyhedron) -> bool {
    for j in 0..p.n {
        for sign in [1.0, -1.0] {
            let mut m = SolverModel::with_free_vars(p.n);
            for b in m.bounds.iter_mut() {
                *b = solver::VarBounds::new(-1.0, 1.0);
            }
            m.objective[j] = -sign;
            for r in &p.rows {
                m.add_row(Row::from_dense(&r.a, Relation::Ge, 0.0));
            }
            match solver::solve_lp(&m) {
                Ok(res) if res.is_optimal() => {
                    if res.objective_value.unwrap_or(0.0) < -1e-9 {
                        return false;
                    }
                }
                _ => return false,
            }
        }
    }
    true
}

fn raw_vertices(rows: &[ConstraintRow]) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = Vec::new();
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            let (a, b) = (&rows[i], &rows[j]);
            let det = a.a[0] * b.a[1] - a.a[1] * b.a[0];
            let scale = (a.a[0].abs() + a.a[1].abs()) * (b.a[0].abs() + b.a[1].abs());
            if det.abs() <= 1e-12 * scale {
                continue;
            }
            let x = (a.b * b.a[1] - a.a[1] * b.b) / det;
            let y = (a.a[0] * b.b - a.b * b.a[0]) / det;
            let v = [x, y];
            let ok = rows
                .iter()
                .all(|r| r.slack(&v) >= -FEASIBILITY_TOL * (1.0 + r.b.abs()));
            if ok && !out.iter().any(|w| (w[0] - x).abs() <= 1e-7 && (w[1] - y).abs() <= 1e-7) {
                out.push(v);
            }
        }
    }
    sort_ccw(&mut out);
    out
}

fn sort_ccw(v: &mut [[f64; 2]]) {
    if v.len() < 2 {
        return;
    }
    let k = v.len() as f64;
    let cx = v.iter().map(|p| p[0]).sum::<f64>() / k;
    let cy = v.iter().map(|p| p[1]).sum::<f64>() / k;
    v.sort_by(|p, q| {
        let ap = (p[1] - cy).atan2(p[0] - cx);
        let aq = (q[1] - cy).atan2(q[0] - cx);
        ap.total_cmp(&aq)
    });
}

/// Vertices of a bounded 2-D region in counter-clockwise order.
pub fn region_vertices_2d(p: &Polyhedron) -> Result<Vec<[f64; 2]>, GeometryError> {
    region_polygon_2d(p, None).map(|poly| poly.vertices)
}

/// Vertices of a 2-D region, clipped to `viewport` when one is given.
/// Without a viewport the region must be bounded.
pub fn region_polygon_2d(p: &Polyhedron, viewport: Option<&Viewport>) -> Result<Polygon2d, GeometryError> {
    if p.n != 2 {
        return Err(GeometryError::NotTwoDimensional(p.n));
    }
    p.check()?;
    if !is_nonempty(p) {
        return Err(GeometryError::EmptyRegion);
    }
    let bounded = is_bounded(p);
    match viewport {
        None if !bounded => Err(GeometryError::UnboundedRegion),
        None => Ok(Polygon2d {
            vertices: raw_vertices(&p.rows),
            clipped: false,
        }),
        Some(vp) => {
            let clipped = !bounded || raw_vertices(&p.rows).iter().any(|v| !vp.contains(*v, 1e-9));
            let mut rows = p.rows.clone();
            rows.extend(vp.rows());
            let vertices = raw_vertices(&rows);
            if vertices.is_empty() {
                return Err(GeometryError::EmptyRegion);
            }
            Ok(Polygon2d { vertices, clipped })
        }
    }
}
