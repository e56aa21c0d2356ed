mod common;

use feasregion::imputation::{
    impute, ImputeError, LossSpec, Prior, ProblemInstance, SideConstraint,
};
use feasregion::polyhedra::{ConstraintRow, Normalization, Polyhedron};
use feasregion::solver::{solve_lp, Relation, Row, SolveStatus, SolverModel};

use common::*;

fn instance(c: Vec<f64>, points: Vec<Vec<f64>>, m1: usize) -> ProblemInstance {
    let n = c.len();
    ProblemInstance::new(c, points, Polyhedron::empty(n), m1, Normalization::SumProxy).unwrap()
}

#[test]
fn indifference_closed_forms() {
    let r = impute(&instance(vec![0.0, 1.0], vec![vec![0.0, 5.0]], 1), &LossSpec::Indifference).unwrap();
    assert_eq!(r.imputed_rows[0].a, vec![0.0, 1.0]);
    assert_eq!(r.imputed_rows[0].b, 5.0);
    let r = impute(&case_two(), &LossSpec::Indifference).unwrap();
    assert_eq!(r.imputed_rows.len(), 6);
    assert!(r.imputed_rows.iter().all(|row| row.a == vec![0.5, 0.5] && row.b == 1.0));
    assert_eq!(r.loss_value, 0.0);
}

#[test]
fn indifference_needs_a_nonzero_cost_sum() {
    let p = instance(vec![1.0, -1.0], case_one_points(), 2);
    assert!(impute(&p, &LossSpec::Indifference).is_err());
}

#[test]
fn adjacency_through_a_single_point() {
    let q = vec![1.0, 3.0];
    let p = instance(vec![1.0, 1.0], vec![q.clone(); 3], 2);
    let r = impute(&p, &LossSpec::Adjacency).unwrap();
    assert!(r.loss_value.abs() < 1e-9);
    for row in &r.imputed_rows {
        assert!(row.slack(&q).abs() < 1e-9);
    }
}

#[test]
fn adjacency_under_the_exact_scale() {
    let p = ProblemInstance::new(
        vec![-1.0, -1.0],
        case_one_points(),
        Polyhedron::new(2, vec![ConstraintRow::new(vec![1.0, 1.0], 1.0)]).unwrap(),
        2,
        Normalization::L1Exact,
    )
    .unwrap();
    let r = impute(&p, &LossSpec::Adjacency).unwrap();
    output_ok(&p, &r).unwrap();
    // Oracle: dense walk around the unit L1 circle.
    let pts = case_one_points();
    let f = |s: f64| {
        let (a1, a2) = match s {
            s if s < 1.0 => (1.0 - s, s),
            s if s < 2.0 => (1.0 - s, 2.0 - s),
            s if s < 3.0 => (s - 3.0, 2.0 - s),
            s => (s - 3.0, s - 4.0),
        };
        let v: Vec<f64> = pts.iter().map(|x| a1 * x[0] + a2 * x[1]).collect();
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        v.iter().map(|t| t - lo).sum::<f64>()
    };
    let mut oracle = f64::INFINITY;
    let steps = 400_000;
    for i in 0..steps {
        oracle = oracle.min(f(4.0 * i as f64 / steps as f64));
    }
    for d in &r.diagnostics {
        assert!((d.objective.unwrap() - oracle).abs() < 1e-6, "{:?} vs {oracle}", d.objective);
    }
}

#[test]
fn fairness_trivial_cases() {
    let p = instance(vec![1.0, 2.0], vec![vec![1.0, 1.0]], 3);
    let r = impute(&p, &LossSpec::Fairness).unwrap();
    assert!(r.loss_value.abs() < 1e-9);
    output_ok(&p, &r).unwrap();

    let line: Vec<Vec<f64>> = (0..4).map(|t| vec![f64::from(t), 2.0 * f64::from(t)]).collect();
    let p = instance(vec![1.0, 1.0], line, 1);
    let r = impute(&p, &LossSpec::Fairness).unwrap();
    assert!(r.loss_value.abs() < 1e-9);
}

#[test]
fn compactness_trivial_cases() {
    let line: Vec<Vec<f64>> = (0..5).map(|t| vec![f64::from(t), 1.0 - f64::from(t)]).collect();
    let p = instance(vec![1.0, 2.0], line.clone(), 1);
    let r = impute(&p, &LossSpec::compactness()).unwrap();
    assert!(r.loss_value.abs() < 1e-9);
    for x in &line {
        assert!(r.imputed_rows[0].slack(x).abs() < 1e-9);
    }

    let p = instance(vec![1.0, 2.0], vec![vec![2.0, -1.0]], 4);
    let r = impute(&p, &LossSpec::compactness()).unwrap();
    assert!(r.loss_value.abs() < 1e-9);
}

#[test]
fn case_one_compactness_row_layout() {
    let p = case_one();
    let r = impute(&p, &LossSpec::compactness()).unwrap();
    // Every observation except the centre lies on some row.
    for (k, x) in p.obs.points.iter().enumerate() {
        let nearest = r.imputed_rows.iter().map(|row| row.slack(x)).fold(f64::INFINITY, f64::min);
        if k == 4 {
            assert!((nearest - 0.5).abs() < 1e-7);
        } else {
            assert!(nearest.abs() < 1e-7, "observation {k} at {nearest}");
        }
    }
}

#[test]
fn compactness_matches_planar_enumeration() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for _ in 0..30 {
        let k = rng.gen_range(2..=7);
        let m1 = rng.gen_range(1..=3);
        let pts: Vec<Vec<f64>> = (0..k)
            .map(|_| vec![f64::from(rng.gen_range(0i32..=6)), f64::from(rng.gen_range(0i32..=6))])
            .collect();
        let p = instance(vec![1.0, 3.0], pts.clone(), m1);
        let r = impute(&p, &LossSpec::compactness()).unwrap();
        let oracle = compactness_oracle_2d(&pts, m1);
        assert!((r.loss_value - oracle).abs() < 1e-7, "{} vs {oracle} on {pts:?}", r.loss_value);
        output_ok(&p, &r).unwrap();
    }
}

#[test]
fn repeating_a_loss_changes_nothing() {
    for loss in [LossSpec::Adjacency, LossSpec::Fairness, LossSpec::compactness()] {
        let p = case_one();
        let single = impute(&p, &loss).unwrap();
        let twice = impute(&p, &LossSpec::combined(vec![loss.clone(), loss.clone()])).unwrap();
        assert!((twice.loss_value - single.loss_value).abs() < 1e-6, "{}", loss.name());
    }
}

/// Stage 2 of `[Fairness, Adjacency]` on Case II with the fairness value held
/// at exactly 0. All `d_k` equal means `Σ_i a_i = 0` (the points span the
/// plane), i.e. three rows of each sign, and the rest is one LP.
fn case_two_pinned_adjacency() -> f64 {
    let pts = case_two_points();
    let m1 = 6;
    let mut m = SolverModel::with_free_vars(3 * m1);
    let a = |i: usize, j: usize| 3 * i + j;
    let b = |i: usize| 3 * i + 2;
    for i in 0..m1 {
        let sigma = if i < 3 { 1.0 } else { -1.0 };
        m.add_row(Row::new(vec![(a(i, 0), 1.0), (a(i, 1), 1.0)], Relation::Eq, sigma));
        for x in &pts {
            m.add_row(Row::new(vec![(a(i, 0), x[0]), (a(i, 1), x[1]), (b(i), -1.0)], Relation::Ge, 0.0));
            m.objective[a(i, 0)] += x[0];
            m.objective[a(i, 1)] += x[1];
            m.objective[b(i)] -= 1.0;
        }
    }
    for j in 0..2 {
        m.add_row(Row::new((0..m1).map(|i| (a(i, j), 1.0)).collect(), Relation::Eq, 0.0));
    }
    let r = solve_lp(&m).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    r.objective_value.unwrap()
}

#[test]
fn case_two_combined_matches_the_pinned_oracle() {
    let p = case_two();
    let r = impute(&p, &LossSpec::combined(vec![LossSpec::Fairness, LossSpec::Adjacency])).unwrap();
    assert!(r.verification.all_ok());
    assert!(r.stage_values[0].abs() < 1e-6);
    let oracle = case_two_pinned_adjacency();
    assert!((r.stage_values[1] - oracle).abs() < 1e-6, "{} vs {oracle}", r.stage_values[1]);
}

#[test]
fn cost_scaling_leaves_rows_unchanged() {
    for loss in [LossSpec::Indifference, LossSpec::Adjacency, LossSpec::compactness()] {
        let base = impute(&case_one(), &loss).unwrap();
        let p = case_one();
        let scaled = ProblemInstance::new(vec![-3.0, -3.0], p.obs.points.clone(), p.known.clone(), p.m1, p.normalization)
            .unwrap();
        let r = impute(&scaled, &loss).unwrap();
        assert!((r.loss_value - base.loss_value).abs() < 1e-9);
        for (x, y) in r.imputed_rows.iter().zip(&base.imputed_rows) {
            assert!(close(&x.a, &y.a, 1e-9) && (x.b - y.b).abs() < 1e-9, "{}", loss.name());
        }
    }
}

#[test]
fn l1_adherence_moves_the_prior_onto_the_hull() {
    let p = case_one();
    let loss = LossSpec::Adherence {
        prior: Prior::from_rows(&square_rows(1.15, 1.85)),
        weights: None,
        distance: feasregion::imputation::Distance::L1,
    };
    let r = impute(&p, &loss).unwrap();
    output_ok(&p, &r).unwrap();
    let want = square_rows(1.0, 2.0);
    for (got, want) in r.imputed_rows.iter().zip(&want) {
        assert!(close(&got.a, &want.a, 1e-9) && (got.b - want.b).abs() < 1e-9, "{got:?}");
    }
    assert!((r.loss_value - 0.6).abs() < 1e-9);
}

#[test]
fn side_constraints_fix_the_right_hand_side() {
    let p = case_one().with_side_constraints(vec![SideConstraint::fix_rhs(None, 2, 0.5)]).unwrap();
    let r = impute(&p, &LossSpec::Adjacency).unwrap();
    assert!(r.imputed_rows.iter().all(|row| (row.b - 0.5).abs() < 1e-9));
    output_ok(&p, &r).unwrap();

    let p = case_one().with_side_constraints(vec![SideConstraint::fix_rhs(None, 2, 1.5)]).unwrap();
    assert!(matches!(
        impute(&p, &LossSpec::Adjacency),
        Err(ImputeError::InfeasibleImputation { .. })
    ));
}

#[test]
fn invalid_instances_are_rejected() {
    let known = Polyhedron::new(2, vec![ConstraintRow::new(vec![1.0, 0.0], 1.5)]).unwrap();
    assert!(matches!(
        ProblemInstance::new(vec![1.0, 1.0], case_one_points(), known, 2, Normalization::SumProxy),
        Err(ImputeError::InvalidInstance(_))
    ));
    assert!(ProblemInstance::new(vec![1.0, 1.0], case_one_points(), Polyhedron::empty(2), 0, Normalization::SumProxy)
        .is_err());
    assert!(ProblemInstance::new(vec![0.0, 0.0], case_one_points(), Polyhedron::empty(2), 1, Normalization::SumProxy)
        .is_err());
}

#[test]
fn big_m_too_small_is_reported() {
    let p = case_two();
    let r = impute(&p, &LossSpec::Compactness { big_m: Some(0.5) });
    assert!(matches!(r, Err(ImputeError::BigMTooSmall { .. })), "{r:?}");
}
