use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn spinlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn read_json(p: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn read_csv(p: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i]).collect()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = path(dir, name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn cm_run_is_deterministic() {
    let d = TempDir::new().unwrap();
    let mut outs = Vec::new();
    for k in 0..2 {
        let (csv, rep) = (path(&d, &format!("a{k}.csv")), path(&d, &format!("a{k}.json")));
        let o = spinlab(&["simulate", "cm", "--seed", "11", "--t-final", "2", "--out", &csv, "--report", &rep]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outs.push((std::fs::read(&csv).unwrap(), std::fs::read(&rep).unwrap()));
    }
    assert_eq!(outs[0], outs[1]);
    let rep = read_json(&path(&d, "a0.json"));
    assert!(rep["measurements"]["relative_energy_drift"].as_f64().unwrap() < 1e-8);
    // every default is echoed
    assert_eq!(rep["config"]["dt"], 1e-3);
    assert_eq!(rep["config"]["scheme"], "rk4");
}

#[test]
fn csv_numbers_carry_17_significant_digits() {
    let d = TempDir::new().unwrap();
    let csv = path(&d, "a.csv");
    let o = spinlab(&["simulate", "rs", "--seed", "1", "--t-final", "0.1", "--out", &csv, "--report", &path(&d, "r.json")]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let first = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().to_string();
    let mantissa = first.trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.replace('.', "").len(), 17, "{first}");
}

#[test]
fn free_cm_run_keeps_energy() {
    let d = TempDir::new().unwrap();
    let cfg = write(
        &d,
        "free.json",
        r#"{"n": 3, "t_final": 1.0, "dt": 0.01, "every": 1,
            "initial": {"q": [0.0, 2.0, 4.0], "p": [0.3, -0.1, 0.2],
                        "xi": {"re": [[0,0,0],[0,0,0],[0,0,0]], "im": [[0,0,0],[0,0,0],[0,0,0]]}}}"#,
    );
    let csv = path(&d, "free.csv");
    let o = spinlab(&["simulate", "cm", "--config", &cfg, "--out", &csv, "--report", &path(&d, "r.json")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&csv);
    let energy = column(&h, &rows, "H");
    let exact = 0.5 * (0.09 + 0.01 + 0.04);
    assert!(energy.iter().all(|e| (e - exact).abs() < 1e-15));
    // free motion
    let q3 = column(&h, &rows, "q_3");
    assert!((q3.last().unwrap() - 4.2).abs() < 1e-12);
}

#[test]
fn rs_columns_follow_the_invariants() {
    let d = TempDir::new().unwrap();
    let cfg = write(
        &d,
        "diag.json",
        r#"{"n": 3, "t_final": 1.0, "dt": 0.01, "every": 5,
            "initial": {"q": [0.0, 1.0, 2.5],
                        "g": {"re": [[1,0,0],[0,-0.5,0],[0,0,2]], "im": [[0,0,0],[0,0,0],[0,0,0]]}}}"#,
    );
    let csv = path(&d, "diag.csv");
    assert_eq!(code(&spinlab(&["simulate", "rs", "--config", &cfg, "--out", &csv, "--report", &path(&d, "r.json")])), 0);
    let (h, rows) = read_csv(&csv);
    for name in ["eig_1", "eig_2", "eig_3"] {
        let c = column(&h, &rows, name);
        assert!(c.iter().all(|v| *v == c[0]), "{name}");
    }

    let csv = path(&d, "gen.csv");
    assert_eq!(code(&spinlab(&["simulate", "rs", "--seed", "5", "--t-final", "3", "--out", &csv, "--report", &path(&d, "g.json")])), 0);
    let (h, rows) = read_csv(&csv);
    // d/dt tr g = tr [g, R g] = 0
    let tr = column(&h, &rows, "trace_1");
    assert!(tr.iter().all(|v| (v - tr[0]).abs() < 1e-10));
    let rep = read_json(&path(&d, "g.json"));
    assert!(rep["measurements"]["max_eigenvalue_drift"].as_f64().unwrap() < 1e-8);
}

#[test]
fn missing_seed_is_invalid_input() {
    let o = spinlab(&["simulate", "cm", "--t-final", "1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
    assert_eq!(code(&spinlab(&["verify", "mdybe"])), 2);
}

#[test]
fn bad_values_are_invalid_input() {
    assert_eq!(code(&spinlab(&["simulate", "cm", "--seed", "1", "--dt", "-1"])), 2);
    assert_eq!(code(&spinlab(&["simulate", "cm", "--seed", "1", "--form", "sideways"])), 2);
    assert_eq!(code(&spinlab(&["verify", "nonsense", "--seed", "1"])), 2);
    let d = TempDir::new().unwrap();
    let cfg = write(&d, "c.json", r#"{"n": 3, "unknown_field": 1}"#);
    assert_eq!(code(&spinlab(&["simulate", "cm", "--seed", "1", "--config", &cfg])), 2);
}

#[test]
fn collision_is_a_numerical_breakdown() {
    let d = TempDir::new().unwrap();
    let cfg = write(
        &d,
        "c.json",
        r#"{"n": 2, "t_final": 1.0, "dt": 0.001,
            "initial": {"q": [0.5, 0.0], "p": [-1.0, 1.0],
                        "xi": {"re": [[0,0],[0,0]], "im": [[0,0],[0,0]]}}}"#,
    );
    let o = spinlab(&["simulate", "cm", "--config", &cfg, "--report", &path(&d, "r.json")]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("collision"));
}

#[test]
fn off_lattice_theta_is_rejected() {
    let d = TempDir::new().unwrap();
    let spec = write(
        &d,
        "s.json",
        r#"{"rank": 1, "m": 1.0, "beta": 1.0, "theta": [3.0], "eta": [0.0],
            "v0": {"re": [[0.0]], "im": [[1.0]]}}"#,
    );
    let o = spinlab(&["soliton", "--spec", &spec]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("theta"));
}

#[test]
fn one_soliton_scan_solves_the_field_equation() {
    let d = TempDir::new().unwrap();
    let spec = write(
        &d,
        "s.json",
        r#"{"rank": 1, "m": 1.0, "beta": 1.0, "theta": [3.141592653589793], "eta": [0.0],
            "v0": {"re": [[0.0]], "im": [[1.0]]}}"#,
    );
    let (csv, rep) = (path(&d, "s.csv"), path(&d, "s.json.out"));
    let o = spinlab(&["soliton", "--spec", &spec, "--grid-count", "10", "--out", &csv, "--report", &rep]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&rep);
    let field = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "field_equation").unwrap();
    assert!(field["max_residual"].as_f64().unwrap() < 1e-5);
    let (h, rows) = read_csv(&csv);
    assert_eq!(rows.len(), 100);
    assert!(column(&h, &rows, "pde").iter().all(|v| *v < 1e-5));
}

#[test]
fn generic_soliton_selects_the_matrix_convention() {
    let d = TempDir::new().unwrap();
    let rep = path(&d, "r.json");
    let o = spinlab(&["soliton", "--seed", "4", "--rank", "2", "--n", "3", "--grid-count", "6", "--report", &rep]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&rep);
    assert_eq!(r["measurements"]["selected_convention"], "matrix");
}

#[test]
fn unattainable_tolerance_fails_verification() {
    let d = TempDir::new().unwrap();
    let rep = path(&d, "j.json");
    let o = spinlab(&["verify", "jacobi", "--seed", "1", "--trials", "3", "--tol", "1e-20", "--report", &rep]);
    assert_eq!(code(&o), 1);
    let r = read_json(&rep);
    assert_eq!(r["pass"], false);
    // the report is still complete
    assert_eq!(r["checks"].as_array().unwrap().len(), 5);
}

#[test]
fn counts_match_the_dimension_formulas() {
    let d = TempDir::new().unwrap();
    for (n, compact, normal) in [(2, 2, 2), (3, 4, 4)] {
        let rep = path(&d, &format!("c{n}.json"));
        let o = spinlab(&["verify", "counts", "--seed", "2", "--n", &n.to_string(), "--report", &rep]);
        assert_eq!(code(&o), 0);
        let r = read_json(&rep);
        assert!(r["measurements"]["compact_ranks"].as_array().unwrap().iter().all(|k| *k == compact));
        assert!(r["measurements"]["normal_ranks"].as_array().unwrap().iter().all(|k| *k == normal));
    }
}

#[test]
fn verify_reports_are_deterministic() {
    let d = TempDir::new().unwrap();
    let a = path(&d, "a.json");
    let b = path(&d, "b.json");
    for p in [&a, &b] {
        let o = spinlab(&["verify", "mdybe", "--seed", "9", "--trials", "40", "--report", p]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let r = read_json(&a);
    assert_eq!(r["config"]["resolved_trials"]["mdybe"], 40);
    assert!(Path::new(&a).exists());
}
