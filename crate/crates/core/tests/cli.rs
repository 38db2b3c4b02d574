use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tubelog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tubelog")).args(args).output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn analyze_reports_real_residues_and_failed_condition_c() {
    let out = tubelog(&["analyze", "2/(z*(z-1)*(z+1))"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let mut pairs: Vec<((f64, f64), (f64, f64))> = doc["poles"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (complex(&p["z"]), complex(&p["residue"])))
        .collect();
    pairs.sort_by(|a, b| a.0 .0.total_cmp(&b.0 .0));
    let expected = [(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)];
    for ((z, l), (ez, el)) in pairs.iter().zip(expected) {
        assert!((z.0 - ez).abs() < 1e-12 && z.1.abs() < 1e-12);
        assert!((l.0 - el).abs() < 1e-12 && l.1.abs() < 1e-12);
    }
    assert_eq!(doc["genericity"]["cond_c"]["pass"], Value::Bool(false));
}

#[test]
fn blueprint_refuses_non_generic_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = tubelog(&["blueprint", "--input", "2/(z*(z-1)*(z+1))", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("analyze.json").is_file());
    assert!(!dir.path().join("blueprint.json").exists());
}

#[test]
fn quartic_blueprint_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = tubelog(&["blueprint", "random:4", "--seed", "1", "--out", d, "--format", "json,svg"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_json(&dir.path().join("blueprint.json"));
    assert_eq!(doc["degree"], 4);
    assert_eq!(doc["polygon"]["sides"].as_array().unwrap().len(), 6);
    assert_eq!(doc["cylinders"].as_array().unwrap().len(), 4);
    assert!(doc["hexagon"].is_object());
    for name in ["figure_a.svg", "figure_b.svg"] {
        assert!(std::fs::read_to_string(dir.path().join(name)).unwrap().starts_with("<svg"));
    }

    let out = tubelog(&["verify", "random:4", "--seed", "1", "--out", d]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let diag = read_json(&dir.path().join("diagnostics.json"));
    assert_eq!(diag["pass"], Value::Bool(true));
    assert!(diag["checks"].as_array().unwrap().len() > 20);
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tubelog(&["blueprint", "random:5", "--seed", "3"]);
    let b = tubelog(&["blueprint", "random:5", "--seed", "3"]);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn cached_and_fresh_runs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let first = tubelog(&["blueprint", "random:5", "--seed", "2", "--stage-cache", d]);
    assert!(dir.path().join("petals.cache.json").is_file());
    assert!(dir.path().join("tree.cache.json").is_file());
    let cached = tubelog(&["blueprint", "random:5", "--seed", "2", "--stage-cache", d]);
    assert!(first.stdout == cached.stdout);

    // A cache written for another input is stale and gets replaced.
    let other = tubelog(&["blueprint", "random:5", "--seed", "4", "--stage-cache", d]);
    let fresh = tubelog(&["blueprint", "random:5", "--seed", "4"]);
    assert!(other.stdout == fresh.stdout);

    // A corrupted cache is ignored.
    std::fs::write(dir.path().join("petals.cache.json"), "{").unwrap();
    let repaired = tubelog(&["blueprint", "random:5", "--seed", "4", "--stage-cache", d]);
    assert!(repaired.stdout == fresh.stdout);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(tubelog(&[]).status.code(), Some(1));
    assert_eq!(tubelog(&["analyze"]).status.code(), Some(1));
    assert_eq!(tubelog(&["analyze", "1/(z-"]).status.code(), Some(1));
    assert_eq!(tubelog(&["frobnicate", "1/z"]).status.code(), Some(1));
    assert_eq!(tubelog(&["analyze", "random:4", "--mesh-res", "10"]).status.code(), Some(1));
}

#[test]
fn petals_and_tree_stages() {
    let out = tubelog(&["petals", "random:6", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["petals"].as_array().unwrap().len(), 6);
    let out = tubelog(&["tree", "random:6", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["tree"].as_array().unwrap().len(), 3);
}
