use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn curvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvlab"))
        .args(args)
        .env_remove("CURVLAB_OUT")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

/// Write a gallery entry to `dir/name.json`.
fn gallery_file(dir: &Path, name: &str) -> String {
    let out = curvlab(&["gallery", "show", name]);
    assert_eq!(code(&out), 0);
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, &out.stdout).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn gallery_list_names_every_entry() {
    let out = curvlab(&["gallery", "list"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert_eq!(names.len(), 8);
    for expected in ["flat-identity", "berndtsson-case", "anti-ordered", "truncation-study"] {
        assert!(names.contains(&expected));
    }
}

#[test]
fn run_writes_a_report_per_check() {
    let tmp = TempDir::new().unwrap();
    let file = gallery_file(tmp.path(), "flat-identity");
    let dir = tmp.path().join("out");
    let out = curvlab(&["run", &file, "--out", dir.to_str().unwrap(), "--seed", "17"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&fs::read(dir.join("summary.json")).unwrap());
    assert_eq!(summary["seed"], 17);
    assert_eq!(summary["exit_code"], 0);
    for check in summary["checks"].as_array().unwrap() {
        let name = check["check"].as_str().unwrap();
        let report = json(&fs::read(dir.join(format!("{name}.json"))).unwrap());
        assert_eq!(report["outcome"], "pass");
    }
    let levi = fs::read_to_string(dir.join("levi.csv")).unwrap();
    assert_eq!(levi.lines().next(), Some("re,im,value"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let file = gallery_file(tmp.path(), "conformal-ordered");
    let dirs: Vec<_> = ["a", "b"].iter().map(|d| tmp.path().join(d)).collect();
    for d in &dirs {
        assert_eq!(code(&curvlab(&["run", &file, "--out", d.to_str().unwrap()])), 0);
    }
    let mut names: Vec<_> = fs::read_dir(&dirs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n != "metadata.json")
        .collect();
    names.sort();
    assert!(names.len() > 5);
    for name in names {
        assert_eq!(
            fs::read(dirs[0].join(&name)).unwrap(),
            fs::read(dirs[1].join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn anti_ordered_exits_with_failure_and_witnesses() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("anti");
    let out = curvlab(&["gallery", "run", "anti-ordered", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    for check in ["hypothesis", "conclusion"] {
        let report = json(&fs::read(dir.join(format!("{check}.json"))).unwrap());
        assert_eq!(report["outcome"], "fail");
        assert!(report["witness"]["s"].is_object() || report["witness"]["s"].is_array());
    }
}

#[test]
fn output_root_comes_from_the_environment() {
    let tmp = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_curvlab"))
        .args(["gallery", "run", "flat-identity"])
        .env("CURVLAB_OUT", tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(tmp.path().join("flat-identity").join("summary.json").exists());
}

#[test]
fn malformed_input_is_a_configuration_error() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"name": "x", "checks": ["validate"]}"#).unwrap();
    assert_eq!(code(&curvlab(&["run", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&curvlab(&["validate", "/nonexistent/file.json"])), 2);
    let unknown = curvlab(&["gallery", "run", "unknown"]);
    assert_eq!(code(&unknown), 2);
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("flat-identity"));
}

#[test]
fn validate_reports_both_metrics() {
    let tmp = TempDir::new().unwrap();
    let file = gallery_file(tmp.path(), "rank2-diagonal");
    let out = curvlab(&["validate", &file]);
    assert_eq!(code(&out), 0);
    let report = json(&out.stdout);
    assert_eq!(report["check"], "validate");
    assert!(report["details"]["source_spd_margin"].as_f64().unwrap() > 0.0);
}

#[test]
fn map_prints_csv_in_row_major_order() {
    let tmp = TempDir::new().unwrap();
    let file = gallery_file(tmp.path(), "conformal-ordered");
    let out = curvlab(&["map", "curvature", &file, "--side", "target"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("re,im,r00_re"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 65 * 65);
    // x varies fastest; curvature of e^{|s|²} is −1
    assert!(rows[1][0] > rows[0][0] && rows[1][1] == rows[0][1]);
    assert!(rows.iter().all(|r| (r[2] + 1.0).abs() < 1e-8));
    for kind in ["norm", "levi"] {
        assert_eq!(code(&curvlab(&["map", kind, &file])), 0);
    }
}

#[test]
fn falsify_summaries_are_reproducible() {
    let empty = curvlab(&["falsify", "--trials", "0", "--seed", "1"]);
    assert_eq!(code(&empty), 0);
    let e = json(&empty.stdout);
    assert_eq!(e["tested"], 0);
    assert!(e["counterexamples"].as_array().unwrap().is_empty());

    let a = curvlab(&["falsify", "--trials", "3", "--seed", "9"]);
    let b = curvlab(&["falsify", "--trials", "3", "--seed", "9"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}
