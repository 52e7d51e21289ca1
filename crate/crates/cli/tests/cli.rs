use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellcover")).args(args).output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn dist_reports_theta0_case() {
    let o = run(&["dist", "--metric", "theta0", "--x", "0", "2", "--y", "0", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let d = json(&o);
    assert_eq!(d["schema_version"], 1);
    assert_eq!(d["command"], "dist");
    assert_eq!(d["case"], 1);
    assert!((d["value"].as_f64().unwrap() - 9.0 * std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn dist_of_a_point_to_itself_is_zero() {
    let d = json(&run(&["dist", "--metric", "theta0", "--x", "1", "1", "--y", "1", "1"]));
    assert_eq!(d["value"], 0.0);
    assert_eq!(d["case"], 0);
}

#[test]
fn nsw_distance_at_the_axis() {
    let d = json(&run(&["dist", "--metric", "nsw", "--k", "1", "--x", "0", "0", "--y", "0.3", "0.04"]));
    assert!((d["value"].as_f64().unwrap() - 0.3).abs() < 1e-12);
}

#[test]
fn missing_seed_is_a_usage_error() {
    assert_eq!(run(&["validate", "--cover", "theta0"]).status.code(), Some(2));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(run(&["dist", "--metric", "theta0", "--bogus"]).status.code(), Some(2));
}

#[test]
fn zero_workers_rejected() {
    let o = run(&["--workers", "0", "dist", "--metric", "theta0", "--x", "0", "0", "--y", "1", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corrupted_cover_exits_one_with_witness() {
    let o = run(&["validate", "--cover", "corrupted", "--seed", "1", "--samples", "300"]);
    assert_eq!(o.status.code(), Some(1));
    let d = json(&o);
    assert_eq!(d["pass"], false);
    let volume = d["reports"].as_array().unwrap().iter().find(|r| r["check"] == "volume").unwrap();
    assert_eq!(volume["pass"], false);
    assert!(!volume["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn config_file_supplies_values_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"cover": "isotropic", "seed": 3, "samples": 200}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "validate", "--samples", "150"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let d = json(&o);
    assert_eq!(d["config"]["seed"], 3);
    assert_eq!(d["config"]["samples"], 150);
    assert_eq!(d["config"]["cover"], "isotropic");
}

#[test]
fn config_with_unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"cover": "isotropic", "seed": 3, "sampels": 200}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "validate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = run(&["check", "--property", "quasi-convex", "--metric", "nsw", "--seed", "1", "--samples", "20", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let d: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((d["reports"][0]["constants"]["Q"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-6);
    assert!(d["timing"]["wall_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn ball_writes_csv_profile() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ball.csv");
    let o = run(&["ball", "--metric", "euclidean", "--n", "3", "--x", "0", "0", "0", "--r", "0.5", "--points", "40", "--csv", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["ux", "uy", "uz", "R", "px", "py", "pz"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 40);
    for r in rows {
        assert!((r[3].parse::<f64>().unwrap() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn ball_needs_csv_path() {
    assert_eq!(run(&["ball", "--metric", "theta0", "--x", "0", "0", "--r", "0.1"]).status.code(), Some(2));
}

#[test]
fn nsw_roundtrip_stops_at_certification() {
    let o = run(&["roundtrip", "--metric", "nsw", "--k", "1", "--seed", "7", "--mc-points", "5000"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["stage"], "certification");
}
