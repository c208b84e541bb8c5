use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qmall(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmall"))
        .args(args)
        .env_remove("QMALL_CONFIG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}\nstdout: {}\nstderr: {}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name).display().to_string()
}

#[test]
fn zero_tolerance_fails_only_inexact_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = qmall(&["check", "--tolerance", "0", "--weyl-tolerance", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let entries = r["entries"].as_array().unwrap();
    assert_eq!(r["summary"]["total"].as_u64().unwrap() as usize, entries.len());
    assert!(r["summary"]["failed"].as_u64().unwrap() > 0);
    for e in entries {
        for key in ["check_id", "paper_ref", "residual", "tolerance", "pass", "runtime_ms"] {
            assert!(e.get(key).is_some(), "{key} missing in {e}");
        }
        assert_eq!(e["runtime_ms"], 0);
        let exact = e["residual"].as_f64().unwrap() == 0.0 && e["tolerance"].as_f64().unwrap() == 0.0;
        assert_eq!(e["pass"].as_bool().unwrap(), exact, "{e}");
    }
    assert!(r["resolutions"].as_array().unwrap().len() >= 5);
    assert_eq!(r["config"]["tolerance"], 0.0);
    let table = String::from_utf8_lossy(&o.stderr);
    assert!(table.contains("FAIL"));
}

#[test]
fn gaussian_single_mode_matches_geometric_series() {
    let o = qmall(&["gaussian", "--lambdas", "1", "--t", "0.5", "--cutoff", "12"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    let q = (-0.5f64).exp();
    let z = 1.0 / (1.0 - q);
    let truncated: f64 = (0..=12).map(|n| q.powi(n)).sum();
    assert!((r["z_exact"].as_f64().unwrap() - z).abs() < 1e-12);
    assert!((r["z_truncated"].as_f64().unwrap() - truncated).abs() < 1e-12);
    let bound = r["tail_bound"].as_f64().unwrap();
    assert!((bound - q.powi(13) / (1.0 - q)).abs() < 1e-14);
    assert!(r["tail_gap"].as_f64().unwrap() <= bound + 1e-14);
    assert!((r["mean_occupations"][0].as_f64().unwrap() - q / (1.0 - q)).abs() < 1e-12);
}

#[test]
fn gaussian_multi_mode_reports_no_bound() {
    let o = qmall(&["gaussian", "--lambdas", "1,2", "--t", "0.5", "--cutoff", "6"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!(r["tail_bound"].is_null());
    let z: f64 = [1.0f64, 2.0].iter().map(|l| 1.0 / (1.0 - (-0.5 * l).exp())).product();
    assert!((r["z_exact"].as_f64().unwrap() - z).abs() < 1e-12);
    assert!(r["tail_gap"].as_f64().unwrap() > 0.0);
}

#[test]
fn wigner_of_one_photon_is_negative_at_the_origin() {
    let dir = tempfile::tempdir().unwrap();
    let vec_path = dir.path().join("one.json");
    std::fs::write(&vec_path, "[[0,0],[1,0],[0,0],[0,0],[0,0]]").unwrap();
    let out = dir.path().join("w.csv");
    let o = qmall(&[
        "wigner", "--modes", "1", "--cutoff", "4", "--state", "vector", "--vector",
        vec_path.to_str().unwrap(), "--h1", "1", "--h2", "1", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let side: Value = serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(side, json(&o));
    assert!(side["negativity_flag"].as_bool().unwrap());
    let origin = -1.0 / (2.0 * std::f64::consts::PI);
    assert!((side["min_value"].as_f64().unwrap() - origin).abs() < 1e-6, "{side}");
    assert!((side["normalization"].as_f64().unwrap() - 1.0).abs() < 1e-6);

    let csv = std::fs::read_to_string(&out).unwrap();
    let nodes = side["grid"]["nodes"].as_u64().unwrap() as usize;
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y,value"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), nodes * nodes);
    for r in rows.iter().step_by(97) {
        let r2 = r[0] * r[0] + r[1] * r[1];
        let exact = (r2 - 1.0) * (-r2 / 2.0).exp() / (2.0 * std::f64::consts::PI);
        assert!((r[2] - exact).abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn wigner_vacuum_and_degenerate_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.csv");
    let o = qmall(&["wigner", "--modes", "2", "--cutoff", "4", "--h1", "1,0", "--h2", "0,1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let side = json(&o);
    assert!(side["degenerate_pair"].as_bool().unwrap());
    assert_eq!(side["h_pairing"], 0.0);
    assert!(!side["negativity_flag"].as_bool().unwrap());
    assert!((side["max_value"].as_f64().unwrap() - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-8);
}

#[test]
fn skorohod_on_adapted_and_non_adapted_samples() {
    let o = qmall(&["skorohod", "--cutoff", "3", "--process", &corpus("weyl_past.json"), "--dump-matrix"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!(r["adapted"].as_bool().unwrap());
    assert!(r["hp_residual"].as_f64().unwrap() <= 1e-9);
    assert!(r["belavkin_residual"].as_f64().unwrap() <= 1e-9);
    let dim = 35; // four modes, total occupation at most 3
    assert_eq!(r["skorohod_matrix"].as_array().unwrap().len(), dim);

    let o = qmall(&["skorohod", "--cutoff", "3", "--process", &corpus("own_bin.json")]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!(!r["adapted"].as_bool().unwrap());
    assert_eq!(r["witness"], serde_json::json!([1, 1]));
    assert!(r["hp_residual"].is_null());
    assert_eq!(r["hp_status"], "not applicable");
    assert!(r.get("skorohod_matrix").is_none());
}

#[test]
fn config_file_env_and_flags_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"cutoff": 5}"#).unwrap();
    let run = |extra: &[&str], env: bool| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_qmall"));
        c.env_remove("QMALL_CONFIG");
        if env {
            c.env("QMALL_CONFIG", &cfg);
        }
        let o = c.args(extra).args(["gaussian", "--lambdas", "1", "--t", "1"]).output().unwrap();
        json(&o)["cutoff"].as_u64().unwrap()
    };
    assert_eq!(run(&[], false), 8);
    assert_eq!(run(&[], true), 5);
    assert_eq!(run(&["--config", cfg.to_str().unwrap()], false), 5);
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "--cutoff", "7"], false), 7);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_cfg = dir.path().join("bad.json");
    std::fs::write(&bad_cfg, r#"{"cutof": 5}"#).unwrap();
    assert_eq!(code(&qmall(&["--config", bad_cfg.to_str().unwrap(), "gaussian", "--lambdas", "1", "--t", "1"])), 2);
    assert_eq!(code(&qmall(&["--grid-nodes", "64", "gaussian", "--lambdas", "1", "--t", "1"])), 2);
    assert_eq!(code(&qmall(&["skorohod", "--process", "/nonexistent/p.json"])), 2);

    let malformed = dir.path().join("p.json");
    std::fs::write(&malformed, r#"{"T": 1.0, "bins": 2, "terms": [{"bin": 3}]}"#).unwrap();
    assert_eq!(code(&qmall(&["skorohod", "--process", malformed.to_str().unwrap()])), 2);

    let out = dir.path().join("w.csv");
    assert_eq!(code(&qmall(&["wigner", "--state", "vector", "--h1", "1,0", "--h2", "0,1", "--out", out.to_str().unwrap()])), 2);
    assert_eq!(code(&qmall(&["wigner", "--h1", "1", "--h2", "1", "--out", out.to_str().unwrap()])), 2);
    assert!(!out.exists());

    let many = vec!["1"; 12].join(",");
    let o = qmall(&["--cutoff", "12", "gaussian", "--lambdas", &many, "--t", "1"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("limit 2000"));

    assert_eq!(code(&qmall(&["frobnicate"])), 2);
    assert_eq!(code(&qmall(&["gaussian", "--t", "1"])), 2);
}
