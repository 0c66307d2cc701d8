use std::process::{Command, Output};

use serde_json::Value;

fn clex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clex"))
        .args(args)
        .env_remove("CLUSTEX_CACHE")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = clex(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn cell(v: &Value, row: usize, col: &str) -> Value {
    let i = v["columns"].as_array().unwrap().iter().position(|c| c == col).unwrap();
    v["rows"][row][i].clone()
}

#[test]
fn verify_passes() {
    let out = clex(&["verify", "--max-n", "5", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(clex(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(clex(&["graphs", "count", "--max-n", "9"]).status.code(), Some(2));
    assert_eq!(clex(&["ising", "duality", "--L", "9"]).status.code(), Some(2));
    assert_eq!(clex(&["polymer", "criteria", "--model", "pentagon"]).status.code(), Some(2));
    assert_eq!(clex(&["ursell", "eval", "--matrix", "not a matrix"]).status.code(), Some(2));
}

#[test]
fn json_schema_and_float_precision() {
    let v = json(&["hardsphere", "radius"]);
    assert_eq!(v["schema_version"], "clex/1");
    assert_eq!(v["command"], "hardsphere radius");
    assert!(v["config"].is_object());
    let raw = cell(&v, 0, "classical").to_string();
    let mantissa = raw.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{raw}");
    assert_eq!(raw.parse::<f64>().unwrap(), (-1.0f64).exp());
}

#[test]
fn domino_thresholds() {
    let v = json(&["polymer", "criteria", "--model", "domino"]);
    let t: Vec<f64> = (0..3).map(|r| cell(&v, r, "threshold").as_f64().unwrap()).collect();
    assert!((t[0] - 1.0 / (7.0 * std::f64::consts::E)).abs() < 1e-6);
    assert!((t[1] - 0.05665).abs() < 1e-5);
    assert!((t[2] - 1.0 / 13.0).abs() < 1e-9);
}

#[test]
fn ising_duality_holds() {
    let v = json(&["ising", "duality", "--L", "4", "--beta", "0.4"]);
    assert_eq!(v["ok"], true);
    assert_eq!(cell(&v, 0, "families_equal"), true);
    let hi = cell(&v, 0, "Xi_highT").as_f64().unwrap();
    let lo = cell(&v, 0, "Xi_lowT_at_dual").as_f64().unwrap();
    assert!((hi - lo).abs() < 1e-12 * hi);
}

#[test]
fn mayer_csv_header() {
    let out = clex(&["mayer", "coefficients", "--volume", "cuboid:2x2", "--n-max", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# mayer coefficients seed=0"));
    assert_eq!(lines.next().unwrap(), "n,C_n,PR,PY,Basuev,exact");
    assert_eq!(lines.count(), 3);
}

#[test]
fn seeded_runs_reproduce() {
    let args = ["hardsphere", "gtilde", "--d", "2", "--k", "3", "--samples", "20000", "--seed", "42"];
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a["rows"], b["rows"]);
    assert_eq!(a["seed"], 42);
    let c = json(&["hardsphere", "gtilde", "--d", "2", "--k", "3", "--samples", "20000", "--seed", "43"]);
    assert_ne!(a["rows"], c["rows"]);
}

#[test]
fn cache_round_trip() {
    let dir = std::env::temp_dir().join(format!("clex-cache-test-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_clex"))
            .args(["graphs", "count", "--max-n", "5", "--format", "json"])
            .env("CLUSTEX_CACHE", &dir)
            .output()
            .unwrap()
    };
    let first = run();
    assert!(first.status.success());
    let entries: Vec<_> = std::fs::read_dir(&dir).unwrap().collect();
    assert_eq!(entries.len(), 1);
    let second = run();
    assert_eq!(first.stdout, second.stdout);
    let v: Value = serde_json::from_slice(&second.stdout).unwrap();
    assert_eq!(cell(&v, 4, "connected"), 728);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn inline_and_file_inputs_agree() {
    let matrix = "3; 0 1 inf; 1 2 0.5";
    let path = std::env::temp_dir().join(format!("clex-matrix-{}.txt", std::process::id()));
    std::fs::write(&path, matrix).unwrap();
    let a = json(&["ursell", "eval", "--matrix", matrix]);
    let b = json(&["ursell", "eval", "--matrix", &format!("@{}", path.display())]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(a["rows"], b["rows"]);
    assert_eq!(a["ok"], true);
}
