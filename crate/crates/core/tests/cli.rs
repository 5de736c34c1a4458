use std::path::{Path, PathBuf};
use std::process::Command;

use geochrome::cli::{run, EXIT_OK, EXIT_USAGE};
use geochrome::coloring::{Coloring, Solver};
use geochrome::point_process::PointSet;

const SUBCOMMANDS: [&str; 8] = [
    "gen",
    "solve",
    "theory",
    "estimate",
    "variance-scan",
    "convergence-scan",
    "battery",
    "verify",
];

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("geochrome").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Compares against `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing {}; run with UPDATE_GOLDEN=1", path.display()));
    assert_eq!(actual, expected, "help text for {name} changed");
}

#[test]
fn help_text_is_pinned() {
    let (code, top, _) = call(&["--help"]);
    assert_eq!(code, EXIT_OK);
    check_golden("help.txt", &top);
    for sub in SUBCOMMANDS {
        let (code, text, _) = call(&[sub, "--help"]);
        assert_eq!(code, EXIT_OK);
        check_golden(&format!("{sub}.txt"), &text);
    }
}

#[test]
fn help_covers_the_flag_schema() {
    let all: String = SUBCOMMANDS.iter().map(|s| call(&[s, "--help"]).1).collect();
    for flag in [
        "--dim", "--lambda", "--k", "--t", "--n", "--nu", "--r", "--s", "--trials", "--seed",
        "--method", "--cap", "--order", "--format", "--out", "--t-grid", "--n-grid",
        "--delta-grid", "--s-grid",
    ] {
        assert!(all.contains(&format!("{flag} ")), "{flag} missing from help");
    }
    for value in ["exact", "sweep1d", "greedy", "anchor", "index", "random", "degree_asc", "json", "csv"] {
        assert!(all.contains(value), "{value} missing from help");
    }
    assert!(all.contains("[default: 28]"));
    assert!(all.contains("[default: json]"));
}

#[test]
fn theory_on_the_line() {
    let (code, out, _) = call(&["theory", "--dim", "1", "--lambda", "2", "--k", "2"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["a_exact"], 0.6);
    assert!(v["a_lower"].as_f64().unwrap() <= 0.6);
    assert!(v["a_upper"].as_f64().unwrap() >= 0.6);
}

#[test]
fn solve_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.json");
    std::fs::write(&path, r#"{"dim":1,"side":3.0,"points":[[0.0],[1.0],[2.0]]}"#).unwrap();
    let p = path.to_str().unwrap();
    let (code, out, _) = call(&["solve", "--in", p, "--r", "1", "--k", "1", "--method", "exact"]);
    assert_eq!(code, EXIT_OK);
    let c: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(c["colored_count"], 2);
    assert_eq!(c["assignment"].as_array().unwrap().len(), 3);

    let (code, out, _) = call(&["solve", "--in", p, "--r", "1", "--k", "2", "--method", "sweep1d"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), r#"{"k":2,"method":"sweep1d","colored_count":3,"assignment":[1,2,1]}"#);

    let (code, out, _) = call(&["solve", "--in", p, "--r", "2", "--k", "2", "--method", "sweep1d"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), r#"{"k":2,"method":"sweep1d","colored_count":2,"assignment":[1,2,0]}"#);
}

#[test]
fn gen_then_solve_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pts.json");
    let p = path.to_str().unwrap();
    let (code, _, err) = call(&["gen", "--dim", "2", "--lambda", "0.7", "--t", "8", "--seed", "42", "--out", p]);
    assert_eq!(code, EXIT_OK);
    assert!(err.contains("master_seed=42"));
    let ps: PointSet = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let direct = geochrome::point_process::sample_poisson(2, 0.7, 8.0, geochrome::point_process::SeedSpec::new(42, 0)).unwrap();
    assert_eq!(ps, direct);

    for (method, solver) in [("exact", Solver::Exact { cap: 28 }), ("greedy", Solver::Greedy { order: geochrome::coloring::GreedyOrder::Index })] {
        let (code, out, _) = call(&["solve", "--in", p, "--r", "1", "--k", "3", "--method", method]);
        assert_eq!(code, EXIT_OK);
        let from_cli: serde_json::Value = serde_json::from_str(&out).unwrap();
        let in_process: Coloring = solver.solve(&direct, 1.0, 3).unwrap();
        assert_eq!(from_cli, serde_json::to_value(&in_process).unwrap());
    }
}

#[test]
fn seeds_are_always_reported() {
    let (code, _, err) = call(&["gen", "--dim", "1", "--n", "5"]);
    assert_eq!(code, EXIT_OK);
    let line = err.lines().find(|l| l.starts_with("master_seed=")).unwrap();
    assert!(line["master_seed=".len()..].parse::<u64>().is_ok());
}

#[test]
fn estimate_csv_has_metadata_line() {
    let (code, out, _) = call(&[
        "estimate", "--dim", "1", "--lambda", "2", "--t", "100", "--k", "2", "--trials", "20", "--seed", "3",
        "--format", "csv",
    ]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    let meta: serde_json::Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(meta["master_seed"], 3);
    assert_eq!(meta["config"]["solver"]["method"], "sweep1d");
    assert!(lines.next().unwrap().starts_with("mean_ratio,se_ratio,ci_lo,ci_hi"));
}

#[test]
fn scans_emit_documented_columns() {
    let (code, out, _) = call(&[
        "variance-scan", "--lambda", "1", "--k", "2", "--t-grid", "50,100", "--trials", "50", "--seed", "1",
        "--format", "csv",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().nth(1), Some("t,var_count,var_norm,ci_lo,ci_hi,trials,failed"));
    assert_eq!(out.lines().count(), 4);

    let (code, out, _) = call(&[
        "convergence-scan", "--dim", "2", "--lambda", "0.5", "--k", "4", "--t-grid", "6", "--trials", "10",
        "--seed", "1",
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let methods: Vec<&str> = v["rows"].as_array().unwrap().iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(methods, ["exact", "greedy", "anchor"]);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["theory", "--dim", "1", "--lambda", "2"][..],
        &["theory", "--dim", "1", "--lambda", "2", "--k", "2", "--bogus"],
        &["estimate", "--k", "2", "--method", "fast", "--lambda", "1", "--t", "5"],
        &["theory", "--dim", "1", "--lambda", "-2", "--k", "2"],
        &["estimate", "--k", "2", "--lambda", "1"],
        &["estimate", "--dim", "2", "--k", "2", "--lambda", "1", "--t", "5", "--method", "sweep1d"],
        &["gen", "--dim", "1", "--seed", "-1", "--n", "3"],
        &["nonsense"],
    ] {
        let (code, _, err) = call(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}: {err}");
    }
}

#[test]
fn verify_reports_through_exit_codes() {
    let (code, out, err) = call(&["verify", "--suite", "battery", "--cases", "40", "--seed", "7"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["suites"][0]["passed"], true);
    assert!(err.contains("PASS battery"));

    let (code, _, err) = call(&[
        "verify", "--suite", "concentration", "--n", "10", "--trials", "100", "--delta-grid", "0", "--seed", "1",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let (code, _, err) = call(&["verify", "--suite", "sandwich", "--seed", "1"]);
    assert_eq!(code, EXIT_OK, "{err}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_geochrome");
    let ok = Command::new(bin).args(["theory", "--dim", "2", "--lambda", "1", "--k", "16"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let bad = Command::new(bin).args(["theory", "--dim", "2"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
    let dense = Command::new(bin)
        .args(["estimate", "--dim", "2", "--lambda", "5", "--t", "6", "--k", "2", "--trials", "5", "--cap", "8", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(dense.status.code(), Some(EXIT_USAGE));
    let missing = Command::new(bin)
        .args(["solve", "--in", "/nonexistent/points.json", "--r", "1", "--k", "1"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
}
