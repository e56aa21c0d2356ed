use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use feasregion::cli::RegionFile;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_feasregion")).args(args).output().unwrap()
}

fn infer(dir: &Path, case: &str, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.join("region.json");
    let problem = data(case);
    let mut args = vec!["infer", "--problem", problem.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (run(&args), out)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn infer_indifference_gives_the_known_set() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = infer(dir.path(), "case1.json", &["--loss", "indifference"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rf = RegionFile::parse(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!(rf.a.iter().all(|a| a == &vec![-0.5, -0.5]));
    assert!(rf.b.iter().all(|&b| b == -2.0));
    assert!(rf.verification.all_ok());
}

#[test]
fn infer_fairness_then_adjacency_gives_the_hull() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot.svg");
    let (o, out) = infer(
        dir.path(),
        "case1.json",
        &["--loss", "fairness", "--secondary", "adjacency", "--plot", plot.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
    let rf = RegionFile::parse(&std::fs::read_to_string(out).unwrap()).unwrap();
    let v = feasregion::polyhedra::region_vertices_2d(&rf.polyhedron().unwrap()).unwrap();
    assert_eq!(v.len(), 4);
    for w in [[1.0, 1.0], [2.0, 1.0], [2.0, 2.0], [1.0, 2.0]] {
        assert!(v.iter().any(|u| (u[0] - w[0]).abs() < 1e-6 && (u[1] - w[1]).abs() < 1e-6), "{v:?}");
    }
    let svg = std::fs::read_to_string(plot).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains(r#"class="imputed""#));
}

#[test]
fn plots_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    infer(dir.path(), "case2.json", &["--plot", a.to_str().unwrap()]);
    infer(dir.path(), "case2.json", &["--plot", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn malformed_problem_exits_1_with_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"n\": 2,\n  \"c\": [1, \n}").unwrap();
    let o = run(&["infer", "--problem", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line") && err.contains("column"), "{err}");
}

#[test]
fn unknown_subcommand_exits_1() {
    assert_eq!(run(&["nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_accepts_its_own_output() {
    let dir = tempfile::tempdir().unwrap();
    for case in ["case1.json", "case2.json"] {
        let (o, out) = infer(dir.path(), case, &[]);
        assert_eq!(o.status.code(), Some(0));
        let problem = data(case);
        let v = run(&["verify", "--region", out.to_str().unwrap(), "--problem", problem.to_str().unwrap()]);
        assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    }
}

#[test]
fn verify_flags_a_raised_row() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = infer(dir.path(), "case1.json", &["--loss", "adjacency"]);
    let mut rf = RegionFile::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    rf.b[0] += 0.5;
    std::fs::write(&out, rf.render()).unwrap();
    let problem = data("case1.json");
    let v = run(&["verify", "--region", out.to_str().unwrap(), "--problem", problem.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_str(&stdout(&v)).unwrap();
    assert!(!report["violations"].as_array().unwrap().is_empty());
    assert_eq!(report["verification"]["primal_feasible"], false);
}

#[test]
fn verify_flags_a_region_without_the_cost_row() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = infer(dir.path(), "case1.json", &["--loss", "indifference"]);
    let mut rf = RegionFile::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    // Drop C from S and bound the region by the box [1,3]^2, which holds (3,3).
    rf.s.rows.remove(0);
    rf.a = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]];
    rf.b = vec![1.0, 1.0, -3.0, -3.0];
    std::fs::write(&out, rf.render()).unwrap();
    let problem = data("case1.json");
    let v = run(&["verify", "--region", out.to_str().unwrap(), "--problem", problem.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_str(&stdout(&v)).unwrap();
    assert_eq!(report["verification"]["x0_optimal"], false);
}

#[test]
fn forward_optima() {
    let dir = tempfile::tempdir().unwrap();
    for (case, loss, want) in [("case1.json", "indifference", "value: -4"), ("case2.json", "adjacency", "value: 2")] {
        let (_, out) = infer(dir.path(), case, &["--loss", loss]);
        let problem = data(case);
        let f = run(&["forward", "--problem", problem.to_str().unwrap(), "--region", out.to_str().unwrap()]);
        assert_eq!(f.status.code(), Some(0));
        let text = stdout(&f);
        assert!(text.contains("status: Optimal") && text.contains(want), "{text}");
    }
}

#[test]
fn forward_on_an_empty_region_reports_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = infer(dir.path(), "case1.json", &["--loss", "indifference"]);
    let mut rf = RegionFile::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    // x1 ≥ 5 and x2 ≥ 0 contradict C, which caps x1 + x2 at 4.
    rf.a = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 1.0]];
    rf.b = vec![5.0, 0.0, 0.0, 0.0];
    std::fs::write(&out, rf.render()).unwrap();
    let problem = data("case1.json");
    let f = run(&["forward", "--problem", problem.to_str().unwrap(), "--region", out.to_str().unwrap()]);
    assert_eq!(f.status.code(), Some(0));
    assert!(stdout(&f).contains("status: Infeasible"));
}

#[test]
fn region_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = infer(dir.path(), "case2.json", &["--loss", "compactness"]);
    let text = std::fs::read_to_string(out).unwrap();
    let rf = RegionFile::parse(&text).unwrap();
    assert_eq!(rf.render(), text);
    let back = RegionFile::from_imputed(&rf.to_imputed().unwrap());
    assert_eq!(back, rf);
}

#[test]
fn diet_on_a_synthetic_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = run(&["diet", "--synthetic", "42", "--out", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert!(r["avg_l1_with"].as_f64().unwrap() <= r["avg_l1_without"].as_f64().unwrap());

    let o = run(&["diet", "--synthetic", "42", "--objective", "max-protein"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn diet_strict_bounds_name_the_violation() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds");
    let o = run(&["diet", "--synthetic", "7", "--foods", "4", "--days", "6", "--write-dataset", ds.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let bounds_path = ds.join("bounds.json");
    let mut bounds: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&bounds_path).unwrap()).unwrap();
    bounds["fat"]["upper"] = serde_json::json!(0.001);
    std::fs::write(&bounds_path, serde_json::to_string_pretty(&bounds).unwrap()).unwrap();
    let args = |relax: bool| {
        let mut v = vec![
            "diet".to_string(),
            "--observations".into(),
            ds.join("observations.csv").display().to_string(),
            "--nutrients".into(),
            ds.join("nutrients.csv").display().to_string(),
            "--bounds".into(),
            bounds_path.display().to_string(),
            "--m1".into(),
            "3".into(),
        ];
        if relax {
            v.push("--auto-relax".into());
        }
        v
    };
    let strict = Command::new(env!("CARGO_BIN_EXE_feasregion")).args(args(false)).output().unwrap();
    assert_eq!(strict.status.code(), Some(1));
    let err = String::from_utf8_lossy(&strict.stderr);
    assert!(err.contains("fat") && err.contains("day"), "{err}");
    let relaxed = Command::new(env!("CARGO_BIN_EXE_feasregion")).args(args(true)).output().unwrap();
    assert_eq!(relaxed.status.code(), Some(0), "{}", String::from_utf8_lossy(&relaxed.stderr));
}
