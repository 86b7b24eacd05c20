use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TRACE_ONE: &str = r#"{"d": 2, "c": 1,
  "H": [[[1,0],[0,0]],[[0,0],[2,0]]],
  "Q": [[[[1,0],[0,0]],[[0,0],[1,0]]]],
  "q": [1]}"#;

const CORNER_ONE: &str = r#"{"d": 2, "c": 1,
  "H": [[[1,0],[0,0]],[[0,0],[2,0]]],
  "Q": [[[[1,0],[0,0]],[[0,0],[0,0]]]],
  "q": [1]}"#;

const SCALAR: &str = r#"{"d": 1, "c": 1, "H": [[[1,0]]], "Q": [[[[1,0]]]], "q": [1]}"#;

const MISMATCH: &str = r#"{"d": 2, "c": 1,
  "H": [[[1,0],[0,0]],[[0,0],[2,0]]],
  "Q": [[[[1,0]]]],
  "q": [1]}"#;

const EMPTY_INTERIOR: &str = r#"{"d": 2, "c": 1,
  "H": [[[1,0],[0,0]],[[0,0],[-1,0]]],
  "Q": [[[[1,0],[0,0]],[[0,0],[-1,0]]]],
  "q": [1]}"#;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: TempDir::new().unwrap(),
        }
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, contents).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_bosonic-sdp")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_with_dimension_schedule() {
    let ws = Workspace::new();
    let inst = ws.file("a.json", TRACE_ONE);
    let report = ws.path("report.json");
    let out = run(["solve", "--instance", p(&inst), "--method", "ga", "--schedule", "dimension", "--epsilon", "0.1", "--report", p(&report)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r, json(&out));
    assert_eq!(r["schema_version"], "bosonic-sdp.report/1");
    assert_eq!(r["config"]["command"], "solve");
    assert_eq!(r["config"]["epsilon"], 0.1);
    let res = &r["result"]["report"];
    assert!((res["e_estimate"].as_f64().unwrap() - 1.0).abs() <= 0.1);
    for key in ["f_t", "temperature", "iterations", "lambda_min_final", "bound_decomposition"] {
        assert!(!res[key].is_null(), "missing {key}");
    }
}

#[test]
fn trace_is_byte_identical_across_runs() {
    let ws = Workspace::new();
    let inst = ws.file("a.json", TRACE_ONE);
    for method in ["ga", "sga"] {
        let (a, b) = (ws.path(&format!("{method}1.csv")), ws.path(&format!("{method}2.csv")));
        for t in [&a, &b] {
            let out = run(["solve", "--instance", p(&inst), "--method", method, "--temperature", "0.1", "--max-iters", "30", "--seed", "9", "--trace", p(t)]);
            assert!(matches!(code(&out), 0 | 2));
        }
        let text = fs::read(&a).unwrap();
        assert_eq!(text, fs::read(&b).unwrap());
        assert!(text.starts_with(b"iter,f_T,grad_norm,lambda_min,step,wall_ms\n"));
    }
}

#[test]
fn malformed_instance_is_rejected_without_artifacts() {
    let ws = Workspace::new();
    let inst = ws.file("bad.json", MISMATCH);
    let (trace, report) = (ws.path("t.csv"), ws.path("r.json"));
    let out = run(["solve", "--instance", p(&inst), "--temperature", "0.1", "--trace", p(&trace), "--report", p(&report)]);
    assert_eq!(code(&out), 64);
    assert!(String::from_utf8_lossy(&out.stderr).contains("field Q[0]"));
    assert!(!trace.exists() && !report.exists());
    let garbage = ws.file("garbage.json", "{not json");
    assert_eq!(code(&run(["oracle", "--instance", p(&garbage)])), 64);
}

#[test]
fn usage_errors_exit_64() {
    let ws = Workspace::new();
    let inst = ws.file("a.json", TRACE_ONE);
    let cases: Vec<Vec<&str>> = vec![
        vec!["solve", "--instance", p(&inst)],
        vec!["solve", "--instance", p(&inst), "--temperature", "0"],
        vec!["solve", "--instance", p(&inst), "--temperature", "0.1", "--epsilon", "0.1"],
        vec!["solve", "--instance", p(&inst), "--schedule", "dimension"],
        vec!["solve", "--instance", p(&inst), "--schedule", "entropy:inf", "--epsilon", "0.1"],
        vec!["solve", "--instance", "/nonexistent.json", "--temperature", "0.1"],
        vec!["solve", "--instance", p(&inst), "--temperature", "0.1", "--method", "bfgs"],
        vec!["solve", "--instance", p(&inst), "--temperature", "0.1", "--trace", "/no/such/dir/t.csv"],
        vec!["estimate", "--instance", p(&inst), "--temperature", "1", "--epsilon", "0.1", "--index", "3"],
        vec!["estimate", "--instance", p(&inst), "--temperature", "1", "--epsilon", "0.1", "--mu", "1,2"],
        vec!["divergence", "--generator", "diagonal", "--x-diag", "1,2"],
        vec!["divergence", "--generator", "diagonal", "--x-diag", "-1,2", "--y-diag", "1,1"],
        vec!["bogus"],
    ];
    for args in cases {
        assert_eq!(code(&run(&args)), 64, "{args:?}");
    }
    assert_eq!(code(&run(["--help"])), 0);
}

#[test]
fn iteration_cap_exits_2() {
    let ws = Workspace::new();
    let inst = ws.file("a.json", TRACE_ONE);
    let out = run(["solve", "--instance", p(&inst), "--temperature", "0.05", "--max-iters", "3"]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out)["result"]["report"]["stop"], "iteration_cap");
}

#[test]
fn empty_dual_interior_exits_3() {
    let ws = Workspace::new();
    let inst = ws.file("e.json", EMPTY_INTERIOR);
    let report = ws.path("r.json");
    let out = run(["solve", "--instance", p(&inst), "--temperature", "0.1", "--report", p(&report)]);
    assert_eq!(code(&out), 3);
    assert!(!report.exists());
}

#[test]
fn oracle_on_corner_constraint() {
    let ws = Workspace::new();
    let inst = ws.file("b.json", CORNER_ONE);
    let out = run(["oracle", "--instance", p(&inst)]);
    assert_eq!(code(&out), 0);
    assert!((json(&out)["result"]["value"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
}

#[test]
fn bounds_hold_on_trace_instance() {
    let ws = Workspace::new();
    let inst = ws.file("a.json", TRACE_ONE);
    let out = run(["bounds", "--instance", p(&inst), "--method", "newton", "--temperature", "0.05"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = &json(&out)["result"];
    let bounds = r["bounds"].as_array().unwrap();
    assert_eq!(bounds.len(), 3);
    assert!(bounds.iter().all(|b| b["holds"] == true));
    let width = |name: &str| bounds.iter().find(|b| b["name"] == name).unwrap()["bound"].as_f64().unwrap();
    assert!(width("spectral") < width("dimension"));
    let t: f64 = 0.05;
    let top = r["spectrum"]["lambda_min"].as_f64().unwrap() + r["spectrum"]["gap"].as_f64().unwrap();
    assert!((width("spectral") - (t + top / ((top / t).exp() - 1.0))).abs() <= 1e-12);
}

#[test]
fn bounds_on_one_dimensional_instance() {
    let ws = Workspace::new();
    let inst = ws.file("s.json", SCALAR);
    let out = run(["bounds", "--instance", p(&inst), "--method", "newton", "--temperature", "0.05"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = &json(&out)["result"];
    let spectral = r["bounds"].as_array().unwrap().iter().find(|b| b["name"] == "spectral").unwrap()["bound"].as_f64().unwrap();
    assert_eq!(spectral, 0.05);
}

#[test]
fn spectral_schedule_solves() {
    let ws = Workspace::new();
    let inst = ws.file("a.json", TRACE_ONE);
    let out = run(["solve", "--instance", p(&inst), "--method", "newton", "--schedule", "spectral", "--epsilon", "0.1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = &json(&out)["result"];
    assert_eq!(r["preliminary_spectrum"]["degeneracy"], 1);
    assert!((r["report"]["e_estimate"].as_f64().unwrap() - 1.0).abs() <= 0.1);
}

#[test]
fn estimate_demos() {
    let ws = Workspace::new();
    let a = ws.file("a.json", TRACE_ONE);
    let out = run(["estimate", "--instance", p(&a), "--temperature", "1", "--epsilon", "0.1", "--seed", "3"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["result"];
    assert_eq!(r["passed"], true);
    assert_eq!(r["budget"]["mode"], "gradient");
    assert!(r["budget"]["predicted_gates"].as_f64().unwrap() > 0.0);

    let out = run(["estimate", "--instance", p(&a), "--temperature", "1", "--epsilon", "0.1", "--sampling", "exact"]);
    let r = &json(&out)["result"];
    assert!(r["abs_error"].as_f64().unwrap() <= 0.1 / 3.0);
    assert_eq!(r["stderr"], 0.0);

    let s = ws.file("s.json", SCALAR);
    let out = run(["estimate", "--instance", p(&s), "--temperature", "1", "--epsilon", "0.5", "--mode", "hessian", "--index", "0,0"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["result"];
    assert!((r["exact"].as_f64().unwrap() + 0.92067).abs() < 1e-5);
    let err = (r["estimate"].as_f64().unwrap() + 0.920674).abs();
    assert!(err <= 3.0 * r["stderr"].as_f64().unwrap(), "{r}");
}

#[test]
fn divergence_demos() {
    let out = run(["divergence", "--generator", "equal", "--dim", "4", "--seed", "2"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["result"]["value"].as_f64().unwrap().abs() <= 1e-9);

    let out = run(["divergence", "--generator", "diagonal", "--x-diag", "1,3", "--y-diag", "2,2"]);
    let want = (9.0f64 / 8.0).ln() + 3.0 * 1.5f64.ln() + 4.0 * 0.75f64.ln();
    assert!((json(&out)["result"]["value"].as_f64().unwrap() - want).abs() <= 1e-12);

    let out = run(["divergence", "--generator", "random-psd", "--dim", "3", "--seed", "5", "--channel", "attenuator:0.5,0"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["result"];
    assert_eq!(r["channel"]["holds"], true);
    assert!(r["umegaki_residual"].as_f64().unwrap() <= 1e-9);

    let out = run(["divergence", "--generator", "diagonal", "--x-diag", "1,3", "--y-diag", "2,0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["result"]["value"], "+inf");

    let ws = Workspace::new();
    let pair = ws.file("pair.json", r#"{"X": [[[2,0],[0,1]],[[0,-1],[3,0]]], "Y": [[[1,0],[0,0]],[[0,0],[1,0]]]}"#);
    let out = run(["divergence", "--input", p(&pair)]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["result"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn budget_and_density() {
    let ws = Workspace::new();
    let density = ws.path("density.csv");
    let out = run(["budget", "--lambda-min", "0.5", "--temperature", "1", "--epsilon", "0.3", "--emit-density", p(&density), "--points", "11"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["result"];
    assert_eq!(r["budget"]["M"], 6);
    let csv = fs::read_to_string(&density).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,p");
    assert_eq!(lines.len(), 12);
    let mid: Vec<f64> = lines[6].split(',').map(|v| v.parse().unwrap()).collect();
    assert!(mid[0].abs() < 1e-12 && (mid[1] - 1.0 / std::f64::consts::PI).abs() < 1e-12);

    let out = run(["budget", "--lambda-min", "1e-6", "--temperature", "1", "--epsilon", "0.1"]);
    assert_eq!(code(&out), 1);
}
