use super::model::{Relation, SolveStatus, SolverModel, SolverResult, VarBounds};
use super::{SolverError, FEASIBILITY_TOL};

const PRICE_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpOptions {
    /// Total pivot cap over both phases.
    pub max_pivots: usize,
    /// Switch to Bland's rule after this many degenerate pivots.
    pub bland_after: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            max_pivots: 50_000,
            bland_after: 1_000,
        }
    }
}

pub fn solve_lp(model: &SolverModel) -> Result<SolverResult, SolverError> {
    solve_lp_with(model, &LpOptions::default())
}

pub fn solve_lp_with(model: &SolverModel, opts: &LpOptions) -> Result<SolverResult, SolverError> {
    model.validate()?;
    if model.has_integrality() {
        return Err(SolverError::NotApplicable(
            "solve_lp called on a model with integral variables".into(),
        ));
    }
    if model.has_quadratic() {
        return Err(SolverError::NotApplicable(
            "solve_lp called on a model with quadratic terms".into(),
        ));
    }
    Ok(lp_core(model, &model.bounds, opts))
}

/// `b'y` plus the bound contributions of the reduced costs `c − A'y`, plus the
/// offset. Equals the primal optimum when `duals` is an optimal dual.
pub fn dual_objective(model: &SolverModel, duals: &[f64]) -> f64 {
    let mut reduced = model.objective.clone();
    let mut scale: Vec<f64> = model.objective.iter().map(|c| c.abs().max(1.0)).collect();
    let mut value = model.objective_offset;
    for (row, &y) in model.rows.iter().zip(duals) {
        value += row.rhs * y;
        for &(j, a) in &row.terms {
            reduced[j] -= a * y;
            scale[j] += (a * y).abs();
        }
    }
    // Cancellation noise on a reduced cost would otherwise meet an infinite bound.
    for (r, s) in reduced.iter_mut().zip(&scale) {
        if r.abs() <= PRICE_TOL * s {
            *r = 0.0;
        }
    }
    for (r, b) in reduced.iter().zip(&model.bounds) {
        if *r > 0.0 {
            value += r * b.lower;
        } else if *r < 0.0 {
            value += r * b.upper;
        }
    }
    value
}

#[derive(Debug, Clone, Copy)]
enum VarMap {
    Fixed(f64),
    /// x = shift + col
    Shift(usize, f64),
    /// x = shift − col
    Neg(usize, f64),
    /// x = pos − neg
    Split(usize, usize),
}

struct StdRow {
    coeffs: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
    /// Index of the model row, or `None` for an upper-bound row.
    origin: Option<usize>,
    flip: f64,
}

struct Tableau {
    width: usize,
    rows: usize,
    data: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    is_art: Vec<bool>,
    dead: Vec<bool>,
    pivots: usize,
    degenerate: usize,
    bland: bool,
}

enum Outcome {
    Optimal,
    Unbounded,
    Limit,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let p = self.data[r * w + q];
        let start = r * w;
        for j in 0..w {
            self.data[start + j] /= p;
        }
        self.data[start + q] = 1.0;
        let prow: Vec<(usize, f64)> = (0..w)
            .filter_map(|j| {
                let v = self.data[start + j];
                (v != 0.0).then_some((j, v))
            })
            .collect();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + q];
            if f == 0.0 {
                continue;
            }
            let base = i * w;
            for &(j, v) in &prow {
                self.data[base + j] -= f * v;
            }
            self.data[base + q] = 0.0;
        }
        let f = self.cost[q];
        if f != 0.0 {
            for &(j, v) in &prow {
                self.cost[j] -= f * v;
            }
            self.cost[q] = 0.0;
        }
        self.basis[r] = q;
        self.pivots += 1;
    }

    fn set_cost(&mut self, c: &[f64]) {
        let w = self.width;
        self.cost = c.to_vec();
        self.cost.push(0.0);
        for r in 0..self.rows {
            let cb = c[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            for j in 0..w {
                self.cost[j] -= cb * self.data[r * w + j];
            }
        }
    }

    /// Runs primal simplex on the current cost row. Artificial columns never enter.
    /// With `bounded` set the objective cannot decrease without limit, so a
    /// column pricing out with no usable pivot is tolerance noise and is
    /// skipped until the next pivot.
    fn iterate(&mut self, opts: &LpOptions, bounded: bool) -> Outcome {
        let rhs = self.rhs_col();
        let mut skip = vec![false; rhs];
        loop {
            if self.pivots >= opts.max_pivots {
                return Outcome::Limit;
            }
            if !self.bland && self.degenerate >= opts.bland_after {
                self.bland = true;
            }
            let mut entering = None;
            let mut best = -PRICE_TOL;
            for j in 0..rhs {
                if self.is_art[j] || skip[j] {
                    continue;
                }
                let d = self.cost[j];
                if d < best {
                    entering = Some(j);
                    if self.bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else {
                return Outcome::Optimal;
            };
            let mut leave: Option<(usize, f64, f64)> = None;
            for r in 0..self.rows {
                if self.dead[r] {
                    continue;
                }
                let a = self.at(r, q);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.at(r, rhs).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio, a)),
                    Some((lr, lratio, la)) => {
                        if ratio < lratio - RATIO_TIE * (1.0 + lratio) {
                            Some((r, ratio, a))
                        } else if ratio <= lratio + RATIO_TIE * (1.0 + lratio) {
                            let better = if self.bland {
                                self.basis[r] < self.basis[lr]
                            } else {
                                a > la
                            };
                            if better {
                                Some((r, ratio, a))
                            } else {
                                Some((lr, lratio, la))
                            }
                        } else {
                            Some((lr, lratio, la))
                        }
                    }
                };
            }
            let Some((r, ratio, _)) = leave else {
                if bounded {
                    skip[q] = true;
                    continue;
                }
                return Outcome::Unbounded;
            };
            if ratio <= RATIO_TIE {
                self.degenerate += 1;
            }
            self.pivot(r, q);
            skip.iter_mut().for_each(|s| *s = false);
        }
    }
}

/// Solves the LP relaxation of `model` under `bounds` (integrality and
/// quadratic terms are ignored). Used directly by branch and bound.
pub(crate) fn lp_core(model: &SolverModel, bounds: &[VarBounds], opts: &LpOptions) -> SolverResult {
    // Infeasible box bounds are detected before building anything.
    if bounds
        .iter()
        .any(|b| b.lower > b.upper + FEASIBILITY_TOL)
    {
        return SolverResult::without_solution(SolveStatus::Infeasible, 0);
    }

    let mut nstd = 0usize;
    let mut map = Vec::with_capacity(model.num_vars);
    let mut std_cost = Vec::new();
    let mut upper_rows: Vec<(usize, f64)> = Vec::new();
    for (j, b) in bounds.iter().enumerate() {
        let c = model.objective[j];
        let m = if b.lower.is_finite() && b.upper.is_finite() && b.upper - b.lower <= 0.0 {
            VarMap::Fixed(b.lower)
        } else if b.lower.is_finite() {
            if b.upper.is_finite() {
                upper_rows.push((nstd, b.upper - b.lower));
            }
            nstd += 1;
            std_cost.push(c);
            VarMap::Shift(nstd - 1, b.lower)
        } else if b.upper.is_finite() {
            nstd += 1;
            std_cost.push(-c);
            VarMap::Neg(nstd - 1, b.upper)
        } else {
            nstd += 2;
            std_cost.push(c);
            std_cost.push(-c);
            VarMap::Split(nstd - 2, nstd - 1)
        };
        map.push(m);
    }

    let mut srows: Vec<StdRow> = Vec::with_capacity(model.rows.len() + upper_rows.len());
    for (ri, row) in model.rows.iter().enumerate() {
        let mut rhs = row.rhs;
        let mut acc: Vec<(usize, f64)> = Vec::with_capacity(row.terms.len());
        for &(j, a) in &row.terms {
            match map[j] {
                VarMap::Fixed(v) => rhs -= a * v,
                VarMap::Shift(col, s) => {
                    rhs -= a * s;
                    acc.push((col, a));
                }
                VarMap::Neg(col, s) => {
                    rhs -= a * s;
                    acc.push((col, -a));
                }
                VarMap::Split(p, n) => {
                    acc.push((p, a));
                    acc.push((n, -a));
                }
            }
        }
        srows.push(StdRow {
            coeffs: acc,
            relation: row.relation,
            rhs,
            origin: Some(ri),
            flip: 1.0,
        });
    }
    for &(col, ub) in &upper_rows {
        srows.push(StdRow {
            coeffs: vec![(col, 1.0)],
            relation: Relation::Le,
            rhs: ub,
            origin: None,
            flip: 1.0,
        });
    }

    // Rows reduced to constants are checked and dropped.
    let mut keep = Vec::with_capacity(srows.len());
    for r in srows {
        if r.coeffs.iter().all(|&(_, v)| v == 0.0) {
            let ok = match r.relation {
                Relation::Ge => 0.0 >= r.rhs - FEASIBILITY_TOL,
                Relation::Le => 0.0 <= r.rhs + FEASIBILITY_TOL,
                Relation::Eq => r.rhs.abs() <= FEASIBILITY_TOL,
            };
            if !ok {
                return SolverResult::without_solution(SolveStatus::Infeasible, 0);
            }
            continue;
        }
        keep.push(r);
    }
    let mut srows = keep;
    for r in srows.iter_mut() {
        if r.rhs < 0.0 || (r.rhs == 0.0 && r.relation == Relation::Ge) {
            r.flip = -1.0;
            r.rhs = -r.rhs;
            for t in r.coeffs.iter_mut() {
                t.1 = -t.1;
            }
            r.relation = match r.relation {
                Relation::Ge => Relation::Le,
                Relation::Le => Relation::Ge,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = srows.len();
    let mut n_aux = 0;
    for r in &srows {
        n_aux += match r.relation {
            Relation::Le | Relation::Eq => 1,
            Relation::Ge => 2,
        };
    }
    let width = nstd + n_aux + 1;
    let mut t = Tableau {
        width,
        rows: m,
        data: vec![0.0; m * width],
        cost: Vec::new(),
        basis: vec![0; m],
        is_art: vec![false; width],
        dead: vec![false; m],
        pivots: 0,
        degenerate: 0,
        bland: false,
    };
    let mut init_col = vec![0usize; m];
    let mut next = nstd;
    for (i, r) in srows.iter().enumerate() {
        let base = i * width;
        for &(j, v) in &r.coeffs {
            t.data[base + j] += v;
        }
        t.data[base + width - 1] = r.rhs;
        match r.relation {
            Relation::Le => {
                t.data[base + next] = 1.0;
                t.basis[i] = next;
                init_col[i] = next;
                next += 1;
            }
            Relation::Ge => {
                t.data[base + next] = -1.0;
                t.data[base + next + 1] = 1.0;
                t.is_art[next + 1] = true;
                t.basis[i] = next + 1;
                init_col[i] = next + 1;
                next += 2;
            }
            Relation::Eq => {
                t.data[base + next] = 1.0;
                t.is_art[next] = true;
                t.basis[i] = next;
                init_col[i] = next;
                next += 1;
            }
        }
    }

    let any_art = t.is_art.iter().any(|&a| a);
    if any_art {
        let c1: Vec<f64> = (0..width - 1)
            .map(|j| if t.is_art[j] { 1.0 } else { 0.0 })
            .collect();
        t.set_cost(&c1);
        match t.iterate(opts, true) {
            Outcome::Optimal => {}
            Outcome::Limit | Outcome::Unbounded => {
                return SolverResult::without_solution(SolveStatus::IterationLimit, t.pivots)
            }
        }
        let infeas: f64 = (0..m)
            .filter(|&r| t.is_art[t.basis[r]])
            .map(|r| t.at(r, width - 1))
            .sum();
        if infeas > FEASIBILITY_TOL {
            return SolverResult::without_solution(SolveStatus::Infeasible, t.pivots);
        }
        for r in 0..m {
            if !t.is_art[t.basis[r]] {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..width - 1 {
                if t.is_art[j] {
                    continue;
                }
                let v = t.at(r, j).abs();
                if v > 1e-7 && best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            match best {
                Some((j, _)) => t.pivot(r, j),
                None => {
                    t.dead[r] = true;
                    for j in 0..width - 1 {
                        if j != t.basis[r] {
                            t.data[r * width + j] = 0.0;
                        }
                    }
                    t.data[r * width + width - 1] = 0.0;
                }
            }
        }
    }

    let mut c2 = std_cost.clone();
    c2.resize(width - 1, 0.0);
    t.set_cost(&c2);
    match t.iterate(opts, false) {
        Outcome::Optimal => {}
        Outcome::Unbounded => {
            return SolverResult::without_solution(SolveStatus::Unbounded, t.pivots)
        }
        Outcome::Limit => {
            return SolverResult::without_solution(SolveStatus::IterationLimit, t.pivots)
        }
    }

    let mut xs = vec![0.0; width - 1];
    for r in 0..m {
        xs[t.basis[r]] = t.at(r, width - 1);
    }
    let x: Vec<f64> = map
        .iter()
        .map(|m| match *m {
            VarMap::Fixed(v) => v,
            VarMap::Shift(c, s) => s + xs[c],
            VarMap::Neg(c, s) => s - xs[c],
            VarMap::Split(p, n) => xs[p] - xs[n],
        })
        .collect();

    let mut duals = vec![0.0; model.rows.len()];
    for (i, r) in srows.iter().enumerate() {
        if let Some(o) = r.origin {
            duals[o] = -t.cost[init_col[i]] * r.flip;
        }
    }
    let objective = model.evaluate(&x);
    SolverResult {
        status: SolveStatus::Optimal,
        solution: Some(x),
        objective_value: Some(objective),
        node_count: 0,
        iterations: t.pivots,
        duals: Some(duals),
    }
}
