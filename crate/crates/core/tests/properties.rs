use proptest::prelude::*;

use feasregion::forward::{robust_preferred_box, solve_forward, ForwardProblem};
use feasregion::imputation::{impute, LossSpec, ProblemInstance};
use feasregion::polyhedra::{normalize_row, preferred_observation, ConstraintRow, Normalization, Polyhedron};
use feasregion::solver::{dual_objective, solve_lp, Relation, Row, SolveStatus, SolverModel, VarBounds};

fn half(v: i32) -> f64 {
    f64::from(v) * 0.5
}

fn points(n: usize, k: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec((-8i32..=8).prop_map(half), n), k)
}

fn cost(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-4i32..=4).prop_map(f64::from), n).prop_filter("nonzero sum", |c| c.iter().sum::<f64>() != 0.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalizing_twice_changes_nothing(a in prop::collection::vec(-5.0f64..5.0, 3), b in -5.0f64..5.0) {
        let row = ConstraintRow::new(a, b);
        for scheme in [Normalization::SumProxy, Normalization::L1Exact] {
            if let Ok(once) = normalize_row(&row, scheme) {
                let twice = normalize_row(&once, scheme).unwrap();
                let tol = |v: f64| 1e-12 * v.abs().max(1.0);
                for (x, y) in once.a.iter().zip(&twice.a) {
                    prop_assert!((x - y).abs() <= tol(*x), "{x} vs {y}");
                }
                prop_assert!((once.b - twice.b).abs() <= tol(once.b));
            }
        }
    }

    #[test]
    fn preferred_index_ignores_positive_scaling(pts in points(3, 1..=8), c in cost(3), t in 0.1f64..10.0) {
        let scaled: Vec<f64> = c.iter().map(|v| v * t).collect();
        let i = preferred_observation(&pts, &c).unwrap();
        let j = preferred_observation(&pts, &scaled).unwrap();
        prop_assert!((dot(&c, &pts[i]) - dot(&c, &pts[j])).abs() < 1e-9);
    }

    #[test]
    fn imputed_regions_hold_convex_combinations(
        pts in points(2, 2..=6),
        c in cost(2),
        m1 in 1usize..=3,
        w in prop::collection::vec(0.0f64..1.0, 6),
    ) {
        let p = ProblemInstance::new(c.clone(), pts.clone(), Polyhedron::empty(2), m1, Normalization::SumProxy).unwrap();
        for loss in [LossSpec::Indifference, LossSpec::Adjacency, LossSpec::Fairness] {
            let r = impute(&p, &loss).unwrap();
            let total: f64 = w[..pts.len()].iter().sum::<f64>().max(1e-9);
            let mut x = vec![0.0; 2];
            for (wk, pk) in w.iter().zip(&pts) {
                x[0] += wk / total * pk[0];
                x[1] += wk / total * pk[1];
            }
            if w[..pts.len()].iter().sum::<f64>() <= 1e-9 {
                x = pts[0].clone();
            }
            prop_assert!(r.region().contains(&x, 1e-7), "{} misses {x:?}", loss.name());

            let fwd = solve_forward(&ForwardProblem::new(c.clone(), r.region()).unwrap()).unwrap();
            prop_assert_eq!(fwd.status, SolveStatus::Optimal);
            prop_assert!((fwd.objective_value.unwrap() - dot(&c, p.x0())).abs() < 1e-7);
        }
    }

    #[test]
    fn robust_boxes_grow_with_the_radius(
        x0 in prop::collection::vec(-5.0f64..5.0, 3),
        c in prop::collection::vec(-3.0f64..3.0, 3),
        r1 in 0.0f64..2.0,
        dr in 0.0f64..2.0,
    ) {
        let small = robust_preferred_box(&x0, r1, &c).unwrap();
        let large = robust_preferred_box(&x0, r1 + dr, &c).unwrap();
        // A larger radius only moves the corner further against the cost.
        prop_assert!(dot(&c, &large) <= dot(&c, &small) + 1e-12);
    }

    #[test]
    fn lp_duals_close_the_gap(
        a in prop::collection::vec(prop::collection::vec(0i32..=4, 3), 1..=4),
        b in prop::collection::vec(1i32..=6, 4),
        obj in prop::collection::vec(-3i32..=0, 3),
    ) {
        let mut m = SolverModel::new();
        for &o in &obj {
            m.add_var(VarBounds::NONNEG, f64::from(o), false);
        }
        for (i, row) in a.iter().enumerate() {
            let dense: Vec<f64> = row.iter().map(|&v| f64::from(v) + 1.0).collect();
            m.add_row(Row::from_dense(&dense, Relation::Le, f64::from(b[i])));
        }
        let r = solve_lp(&m).unwrap();
        prop_assert_eq!(r.status, SolveStatus::Optimal);
        let y = r.duals.unwrap();
        prop_assert!((dual_objective(&m, &y) - r.objective_value.unwrap()).abs() < 1e-7);
    }
}
