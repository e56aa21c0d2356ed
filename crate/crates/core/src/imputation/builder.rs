//! Assembles LP/MILP models over the unknown rows `(a_i, b_i)`.
//!
//! Each row owns `n + 1` free variables plus whatever its normalization needs:
//! a fixed sign `σ` (one equality), a sign binary `z_i` with
//! `Σ_j a_ij − 2 z_i = −1`, or the split `a_ij = p_ij − q_ij` with selector
//! binaries for the exact L1 scale. Loss blocks add their auxiliary variables
//! and return the stage objective as a linear expression.

use crate::polyhedra::{ConstraintRow, Normalization, NormalizationTag};
use crate::solver::{Relation, Row, SolverModel, VarBounds};

use super::instance::{ProblemInstance, SideConstraint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sign {
    Fixed(i8),
    Binary,
}

#[derive(Debug, Clone)]
pub(crate) enum Scale {
    SumFixed(i8),
    SumBinary { z: usize },
    L1 { p: Vec<usize>, q: Vec<usize>, s: Vec<usize> },
}

#[derive(Debug, Clone)]
pub(crate) struct RowVars {
    pub a: Vec<usize>,
    pub b: usize,
    pub scale: Scale,
}

/// Linear expression `Σ coeff · var + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Expr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Expr {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, v)| v * x[j]).sum::<f64>()
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Block {
    Zero,
    Adjacency,
    AdherenceL1 {
        prior: Vec<ConstraintRow>,
        e: Vec<Vec<usize>>,
        f: Vec<usize>,
    },
    Fairness {
        u: Vec<usize>,
        v: Vec<usize>,
    },
    Compactness {
        m: Vec<usize>,
        /// `gamma[i][k]`; empty when there is a single row.
        gamma: Vec<Vec<usize>>,
        big_m: f64,
        delta: Vec<f64>,
    },
    /// Slack of one observation in the single row of a per-row model.
    Slack,
}

pub(crate) struct Builder<'a> {
    pub p: &'a ProblemInstance,
    pub model: SolverModel,
    pub rows: Vec<RowVars>,
    pub blocks: Vec<Block>,
    centered: Vec<Vec<f64>>,
}

impl<'a> Builder<'a> {
    /// Row variables for `count` rows (instance rows `first..first+count`),
    /// their scale rows, observation feasibility and side constraints.
    pub fn new(p: &'a ProblemInstance, first: usize, count: usize, sign: Sign) -> Self {
        let mut model = SolverModel::new();
        let n = p.n;
        let mut rows = Vec::with_capacity(count);
        for i in 0..count {
            let a: Vec<usize> = (0..n).map(|_| model.add_var(VarBounds::FREE, 0.0, false)).collect();
            let b = model.add_var(VarBounds::FREE, 0.0, false);
            let scale = match (p.normalization, sign) {
                (Normalization::SumProxy, Sign::Fixed(sigma)) => {
                    model.add_row(Row::new(
                        a.iter().map(|&j| (j, 1.0)).collect(),
                        Relation::Eq,
                        f64::from(sigma),
                    ));
                    Scale::SumFixed(sigma)
                }
                (Normalization::SumProxy, Sign::Binary) => {
                    let z = model.add_binary(0.0);
                    let mut terms: Vec<(usize, f64)> = a.iter().map(|&j| (j, 1.0)).collect();
                    terms.push((z, -2.0));
                    model.add_row(Row::new(terms, Relation::Eq, -1.0));
                    Scale::SumBinary { z }
                }
                (Normalization::L1Exact, _) => {
                    let mut pv = Vec::with_capacity(n);
                    let mut qv = Vec::with_capacity(n);
                    let mut sv = Vec::with_capacity(n);
                    let mut total = Vec::with_capacity(2 * n);
                    for &aj in &a {
                        let pj = model.add_var(VarBounds::new(0.0, 1.0), 0.0, false);
                        let qj = model.add_var(VarBounds::new(0.0, 1.0), 0.0, false);
                        let sj = model.add_binary(0.0);
                        model.add_row(Row::new(vec![(aj, 1.0), (pj, -1.0), (qj, 1.0)], Relation::Eq, 0.0));
                        model.add_row(Row::new(vec![(pj, 1.0), (sj, -1.0)], Relation::Le, 0.0));
                        model.add_row(Row::new(vec![(qj, 1.0), (sj, 1.0)], Relation::Le, 1.0));
                        total.push((pj, 1.0));
                        total.push((qj, 1.0));
                        pv.push(pj);
                        qv.push(qj);
                        sv.push(sj);
                    }
                    model.add_row(Row::new(total, Relation::Eq, 1.0));
                    Scale::L1 { p: pv, q: qv, s: sv }
                }
            };
            let rv = RowVars { a, b, scale };
            for x in &p.obs.points {
                model.add_row(Row::new(slack_terms(&rv, x), Relation::Ge, 0.0));
            }
            for sc in p.side_for(first + i) {
                model.add_row(side_row(&rv, sc));
            }
            rows.push(rv);
        }
        let centroid = p.obs.centroid();
        let centered = p
            .obs
            .points
            .iter()
            .map(|x| x.iter().zip(&centroid).map(|(a, b)| a - b).collect())
            .collect();
        Builder {
            p,
            model,
            rows,
            blocks: Vec::new(),
            centered,
        }
    }

    /// Terms of `a_i'x − b_i`.
    pub fn slack(&self, i: usize, x: &[f64]) -> Vec<(usize, f64)> {
        slack_terms(&self.rows[i], x)
    }

    /// Adds a loss block and returns its objective expression.
    pub fn add_block(&mut self, block: BlockSpec) -> Expr {
        let m1 = self.rows.len();
        let k = self.p.k();
        let (block, expr) = match block {
            BlockSpec::Zero => (Block::Zero, Expr::default()),
            BlockSpec::Adjacency => {
                let mut sums = vec![0.0; self.p.n];
                for x in &self.p.obs.points {
                    for (s, v) in sums.iter_mut().zip(x) {
                        *s += v;
                    }
                }
                let mut terms = Vec::new();
                for r in &self.rows {
                    for (&j, &s) in r.a.iter().zip(&sums) {
                        terms.push((j, s));
                    }
                    terms.push((r.b, -(k as f64)));
                }
                (Block::Adjacency, Expr { terms, constant: 0.0 })
            }
            BlockSpec::AdherenceL1 { prior, weights } => {
                let mut e = Vec::with_capacity(m1);
                let mut f = Vec::with_capacity(m1);
                let mut terms = Vec::new();
                for (i, r) in self.rows.clone().iter().enumerate() {
                    let w = weights[i];
                    let mut ei = Vec::with_capacity(self.p.n);
                    for (j, &aj) in r.a.iter().enumerate() {
                        let ev = self.model.add_var(VarBounds::NONNEG, 0.0, false);
                        let target = prior[i].a[j];
                        self.model.add_row(Row::new(vec![(ev, 1.0), (aj, -1.0)], Relation::Ge, -target));
                        self.model.add_row(Row::new(vec![(ev, 1.0), (aj, 1.0)], Relation::Ge, target));
                        terms.push((ev, w));
                        ei.push(ev);
                    }
                    let fv = self.model.add_var(VarBounds::NONNEG, 0.0, false);
                    let target = prior[i].b;
                    self.model.add_row(Row::new(vec![(fv, 1.0), (r.b, -1.0)], Relation::Ge, -target));
                    self.model.add_row(Row::new(vec![(fv, 1.0), (r.b, 1.0)], Relation::Ge, target));
                    terms.push((fv, w));
                    e.push(ei);
                    f.push(fv);
                }
                (Block::AdherenceL1 { prior, e, f }, Expr { terms, constant: 0.0 })
            }
            BlockSpec::Fairness => {
                let mut u = Vec::with_capacity(k);
                let mut v = Vec::with_capacity(k);
                let mut terms = Vec::new();
                for kk in 0..k {
                    let uk = self.model.add_var(VarBounds::NONNEG, 0.0, false);
                    let vk = self.model.add_var(VarBounds::NONNEG, 0.0, false);
                    let mut row = Vec::new();
                    for r in &self.rows {
                        for (&j, &dx) in r.a.iter().zip(&self.centered[kk]) {
                            if dx != 0.0 {
                                row.push((j, dx));
                            }
                        }
                    }
                    row.push((uk, -1.0));
                    row.push((vk, 1.0));
                    self.model.add_row(Row::new(row, Relation::Eq, 0.0));
                    terms.push((uk, 1.0));
                    terms.push((vk, 1.0));
                    u.push(uk);
                    v.push(vk);
                }
                (Block::Fairness { u, v }, Expr { terms, constant: 0.0 })
            }
            BlockSpec::Compactness { big_m, delta } => {
                let mut m = Vec::with_capacity(k);
                let mut terms = Vec::new();
                for &d in delta.iter().take(k) {
                    let mk = self.model.add_var(VarBounds::new(d, f64::INFINITY), 0.0, false);
                    terms.push((mk, 1.0));
                    m.push(mk);
                }
                let mut gamma: Vec<Vec<usize>> = Vec::new();
                if m1 > 1 {
                    gamma = (0..m1)
                        .map(|_| (0..k).map(|_| self.model.add_binary(0.0)).collect())
                        .collect();
                }
                let points = self.p.obs.points.clone();
                for (kk, x) in points.iter().enumerate() {
                    for i in 0..m1 {
                        let mut row: Vec<(usize, f64)> = self.slack(i, x).into_iter().map(|(j, v)| (j, -v)).collect();
                        row.push((m[kk], 1.0));
                        if m1 > 1 {
                            row.push((gamma[i][kk], big_m));
                        }
                        self.model.add_row(Row::new(row, Relation::Ge, 0.0));
                    }
                    if m1 > 1 {
                        let row = (0..m1).map(|i| (gamma[i][kk], 1.0)).collect();
                        self.model.add_row(Row::new(row, Relation::Eq, (m1 - 1) as f64));
                    }
                }
                (
                    Block::Compactness {
                        m,
                        gamma,
                        big_m,
                        delta,
                    },
                    Expr { terms, constant: 0.0 },
                )
            }
            BlockSpec::Slack { k: kk } => {
                let x = self.p.obs.points[kk].clone();
                (Block::Slack, Expr {
                    terms: self.slack(0, &x),
                    constant: 0.0,
                })
            }
        };
        self.blocks.push(block);
        expr
    }

    /// Reads the rows out of a solution, rescaled so the scale equality holds
    /// to rounding and tagged accordingly.
    pub fn extract_rows(&self, x: &[f64]) -> Vec<ConstraintRow> {
        self.rows
            .iter()
            .map(|r| {
                let a: Vec<f64> = r.a.iter().map(|&j| x[j]).collect();
                let b = x[r.b];
                exact_scale(a, b, self.p.normalization)
            })
            .collect()
    }

    /// Full variable vector for given rows, with every auxiliary variable set
    /// to its best value for those rows. `None` when a row does not fit the
    /// scale of this model.
    pub fn complete(&self, rows: &[ConstraintRow]) -> Option<Vec<f64>> {
        if rows.len() != self.rows.len() {
            return None;
        }
        let mut x = vec![0.0; self.model.num_vars];
        for (r, row) in self.rows.iter().zip(rows) {
            for (&j, &v) in r.a.iter().zip(&row.a) {
                x[j] = v;
            }
            x[r.b] = row.b;
            let sum: f64 = row.a.iter().sum();
            match &r.scale {
                Scale::SumFixed(sigma) => {
                    if (sum - f64::from(*sigma)).abs() > 1e-9 {
                        return None;
                    }
                }
                Scale::SumBinary { z } => {
                    if (sum - 1.0).abs() <= 1e-9 {
                        x[*z] = 1.0;
                    } else if (sum + 1.0).abs() <= 1e-9 {
                        x[*z] = 0.0;
                    } else {
                        return None;
                    }
                }
                Scale::L1 { p, q, s } => {
                    for (j, &v) in row.a.iter().enumerate() {
                        x[p[j]] = v.max(0.0);
                        x[q[j]] = (-v).max(0.0);
                        x[s[j]] = if v > 0.0 { 1.0 } else { 0.0 };
                    }
                }
            }
        }
        let slacks: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| self.p.obs.points.iter().map(|x| r.slack(x)).collect())
            .collect();
        for block in &self.blocks {
            match block {
                Block::Zero | Block::Adjacency | Block::Slack => {}
                Block::AdherenceL1 { prior, e, f, .. } => {
                    for (i, row) in rows.iter().enumerate() {
                        for (j, &v) in row.a.iter().enumerate() {
                            x[e[i][j]] = (v - prior[i].a[j]).abs();
                        }
                        x[f[i]] = (row.b - prior[i].b).abs();
                    }
                }
                Block::Fairness { u, v } => {
                    for (kk, dx) in self.centered.iter().enumerate() {
                        let dev: f64 = rows
                            .iter()
                            .map(|r| r.a.iter().zip(dx).map(|(a, d)| a * d).sum::<f64>())
                            .sum();
                        x[u[kk]] = dev.max(0.0);
                        x[v[kk]] = (-dev).max(0.0);
                    }
                }
                Block::Compactness { m, gamma, delta, .. } => {
                    for kk in 0..m.len() {
                        let mut best = 0;
                        for i in 1..rows.len() {
                            if slacks[i][kk] < slacks[best][kk] {
                                best = i;
                            }
                        }
                        x[m[kk]] = slacks[best][kk].max(delta[kk]);
                        if !gamma.is_empty() {
                            for (i, g) in gamma.iter().enumerate() {
                                x[g[kk]] = if i == best { 0.0 } else { 1.0 };
                            }
                        }
                    }
                }
            }
        }
        Some(x)
    }
}

/// Loss block request; see [`Builder::add_block`].
#[derive(Debug, Clone)]
pub(crate) enum BlockSpec {
    Zero,
    Adjacency,
    AdherenceL1 { prior: Vec<ConstraintRow>, weights: Vec<f64> },
    Fairness,
    Compactness { big_m: f64, delta: Vec<f64> },
    Slack { k: usize },
}

pub(crate) fn slack_terms(r: &RowVars, x: &[f64]) -> Vec<(usize, f64)> {
    let mut t: Vec<(usize, f64)> = r
        .a
        .iter()
        .zip(x)
        .filter(|(_, &v)| v != 0.0)
        .map(|(&j, &v)| (j, v))
        .collect();
    t.push((r.b, -1.0));
    t
}

fn side_row(r: &RowVars, sc: &SideConstraint) -> Row {
    let mut t: Vec<(usize, f64)> = r
        .a
        .iter()
        .zip(&sc.coeffs)
        .filter(|(_, &v)| v != 0.0)
        .map(|(&j, &v)| (j, v))
        .collect();
    if sc.b_coeff != 0.0 {
        t.push((r.b, sc.b_coeff));
    }
    Row::new(t, sc.relation, sc.rhs)
}

/// Rescales a solver row so its tag holds to rounding. The factor is within
/// solver tolerance of 1, so slacks move by a negligible relative amount.
pub(crate) fn exact_scale(a: Vec<f64>, b: f64, scheme: Normalization) -> ConstraintRow {
    match scheme {
        Normalization::SumProxy => {
            let s: f64 = a.iter().sum();
            let sigma: i8 = if s >= 0.0 { 1 } else { -1 };
            let f = 1.0 / s.abs();
            let mut a: Vec<f64> = a.iter().map(|v| v * f).collect();
            // Fold the remaining rounding into the largest coefficient.
            let resid = f64::from(sigma) - a.iter().sum::<f64>();
            if let Some(j) = (0..a.len()).max_by(|&x, &y| a[x].abs().total_cmp(&a[y].abs())) {
                a[j] += resid;
            }
            ConstraintRow {
                a,
                b: b * f,
                tag: NormalizationTag::SumProxy { sigma },
            }
        }
        Normalization::L1Exact => {
            let l1: f64 = a.iter().map(|v| v.abs()).sum();
            let f = 1.0 / l1;
            ConstraintRow {
                a: a.iter().map(|v| v * f).collect(),
                b: b * f,
                tag: NormalizationTag::L1Exact,
            }
        }
    }
}
