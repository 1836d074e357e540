use std::process::{Command, Output};

use serde_json::Value;

fn infometric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infometric"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut full = args.to_vec();
    full.extend(["--format", "json", "--no-timestamp"]);
    let out = infometric(&full);
    let v = serde_json::from_slice(&out.stdout).expect("valid JSON report");
    (v, out.status.code().unwrap())
}

fn csv_body(stdout: &[u8]) -> Vec<String> {
    String::from_utf8_lossy(stdout)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[test]
fn bpst_diagonal_is_hyperbolic_constant() {
    let (v, code) = json(&["bpst", "--lambda", "1.0", "--tol", "1e-8"]);
    assert_eq!(code, 0);
    let diag = v["summary"]["gram_diagonal"].as_array().unwrap();
    assert_eq!(diag.len(), 5);
    for d in diag {
        assert!((d.as_f64().unwrap() - 252.6619).abs() < 1e-4, "{d}");
    }
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn fixtures_pass() {
    let (v, code) = json(&["fixtures"]);
    assert_eq!(code, 0);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[0]["name"], "I1");
    assert!((rows[0]["value"].as_f64().unwrap() - 1.0 / 60.0).abs() < 1e-10);
    assert!((rows[2]["value"].as_f64().unwrap() / (8.0 * std::f64::consts::PI.powi(2)) - 1.0).abs() < 1e-9);
}

#[test]
fn cp2_outside_window_is_a_domain_error() {
    let out = infometric(&["cp2", "--t", "0.99999"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("outside the validated window"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn cp2_json_fields() {
    let (v, code) = json(&["cp2", "--t-grid", "0.3:0.9:4"]);
    assert_eq!(code, 0);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for key in ["closed_radial", "quad_radial", "rel_err_radial", "quad_radial_err", "converged"] {
        assert!(rows[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn curv_csv_header() {
    let out = infometric(&["curv", "--preset", "vertex", "--lambda-grid", "0.5:0.99:5"]);
    assert_eq!(out.status.code(), Some(0));
    let body = csv_body(&out.stdout);
    assert_eq!(body[0], "lambda,r,sigma_TN,sigma_TT1,sigma_TT4");
    assert_eq!(body.len(), 6);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with(&format!("# version={} command=curv", env!("CARGO_PKG_VERSION"))));
}

#[test]
fn reports_are_deterministic() {
    let args = ["probe", "--eps-grid", "1e-3:1e-6:4", "--no-timestamp"];
    let a = infometric(&args);
    let b = infometric(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let stamped = infometric(&["probe", "--eps-grid", "1e-3:1e-6:4"]);
    assert!(String::from_utf8_lossy(&stamped.stdout).contains("# timestamp="));
}

#[test]
fn failed_check_exits_two_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("geod.csv");
    let out = infometric(&[
        "geod", "--dt", "0.2", "--steps", "40", "--out", path.to_str().unwrap(), "--no-timestamp",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("passed=false"));
    assert!(text.contains("tau,lambda,s,energy,momentum"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "format = json\nno_timestamp = true\nnodes = 32\n").unwrap();
    let out = infometric(&["fixtures", "--config", conf.to_str().unwrap()]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["params"]["nodes"], 32);
    assert!(v.get("timestamp").is_none());
    let out = infometric(&["fixtures", "--config", conf.to_str().unwrap(), "--format", "csv"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("# version="));
}

#[test]
fn invalid_configuration_exits_one() {
    for args in [
        &["bpst", "--tol", "1e-1"][..],
        &["bpst", "--nodes", "4"],
        &["bpst", "--center", "1,2"],
        &["curv", "--lambda-grid", "0.1:0.5"],
        &["geod", "--start", "0.5"],
        &["nonsense"],
    ] {
        let out = infometric(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn schema_lists_fixed_fields() {
    let out = infometric(&["schema"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = v["commands"]["curv"]["csv"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names.join(","), "lambda,r,sigma_TN,sigma_TT1,sigma_TT4");
    assert!(v["version"].is_string());
}
