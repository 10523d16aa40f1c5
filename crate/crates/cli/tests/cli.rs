use std::process::{Command, Output};

use serde_json::Value;

fn qpath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpath"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = qpath(args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn rho_breakdown() {
    let v = json_ok(&["rho", "--word", "3,1,2"]);
    assert_eq!(v["rho"], 2);
    assert_eq!((v["l"].as_u64(), v["r"].as_u64(), v["b"].as_u64()), (Some(1), Some(1), Some(0)));

    let v = json_ok(&["rho", "--word", "1,1"]);
    assert_eq!((v["rho"].as_u64(), v["b"].as_u64()), (Some(1), Some(1)));
}

#[test]
fn rho_rejects_zero_letters() {
    assert_eq!(qpath(&["rho", "--word", "1,0,2"]).status.code(), Some(2));
}

#[test]
fn limit_spot_values() {
    let v = json_ok(&["limit", "--n", "3"]);
    assert_eq!(v["expectation"], "8/3");
    assert_eq!(v["variance"], "2/9");
}

#[test]
fn exact_moments_in_lowest_terms() {
    let v = json_ok(&["moments", "--n", "2", "--q", "1/2", "--exact"]);
    assert_eq!(v["expectation"], "1");
    assert_eq!(v["variance"], "0");

    let v = json_ok(&["moments", "--n", "3", "--q", "2/4", "--exact"]);
    assert_eq!(v["q"], "1/2");
    assert_eq!(v["expectation"], "20/7");
    assert_eq!(v["second_factorial"], "38/7");
    assert_eq!(v["variance"], "6/49");
    assert_eq!(v["source"], "closed-form");
}

#[test]
fn float_moments_accept_decimals() {
    let v = json_ok(&["moments", "--n", "3", "--q", "0.5"]);
    assert!((v["expectation"].as_f64().unwrap() - 20.0 / 7.0).abs() < 1e-12);
    assert!((v["variance"].as_f64().unwrap() - 6.0 / 49.0).abs() < 1e-12);
}

#[test]
fn exact_mode_rejects_decimals() {
    let out = qpath(&["moments", "--n", "3", "--q", "0.5", "--exact"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("decimal"));
}

#[test]
fn q_equal_one_points_to_limit() {
    for q in ["1", "1/1", "1.0"] {
        let out = qpath(&["moments", "--n", "4", "--q", q]);
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains("limit"), "q={q}");
    }
}

#[test]
fn q_out_of_range_is_usage_error() {
    for q in ["0", "3/2", "-1/2", "abc"] {
        assert_eq!(qpath(&["moments", "--n", "4", "--q", q]).status.code(), Some(2), "q={q}");
    }
}

#[test]
fn malformed_flags_are_usage_errors() {
    assert_eq!(qpath(&["moments", "--n", "x", "--q", "1/2"]).status.code(), Some(2));
    assert_eq!(qpath(&["moments", "--q", "1/2"]).status.code(), Some(2));
    assert_eq!(qpath(&["bogus"]).status.code(), Some(2));
    assert_eq!(qpath(&["table", "--n", "5..2", "--q", "1/2"]).status.code(), Some(2));
}

#[test]
fn distribution() {
    let v = json_ok(&["dist", "--n", "3", "--q", "1/2", "--exact"]);
    assert_eq!(v["pmf"]["2"], "1/7");
    assert_eq!(v["pmf"]["3"], "6/7");
}

#[test]
fn resource_caps() {
    assert_eq!(qpath(&["dist", "--n", "9", "--q", "1/2"]).status.code(), Some(3));
    assert_eq!(qpath(&["verify", "--nmax", "8", "--q", "1/2"]).status.code(), Some(3));
    assert_eq!(
        qpath(&["moments", "--n", "200", "--q", "999/1000", "--exact"]).status.code(),
        Some(3)
    );
}

#[test]
fn verify_passes_and_lists_checks() {
    let v = json_ok(&["verify", "--nmax", "4", "--q", "1/2,1/3", "--pmax", "5"]);
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["pass"] == true));
    assert!(checks.iter().any(|c| c["name"] == "theta Λ6 LL n=3 q=1/2"));
}

#[test]
fn verify_original_formulas_fail_with_exit_1() {
    let out = qpath(&["verify", "--nmax", "4", "--q", "1/2", "--pmax", "3", "--formulas", "original"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
    let failing: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failing.contains(&"theta Λ9 LR n=4 q=1/2"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checks failed"));
}

#[test]
fn table_csv_is_stable() {
    let args = ["table", "--n", "1..6", "--q", "7/10"];
    let a = qpath(&args);
    let b = qpath(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,q,E,V,source");
    assert_eq!(lines.len(), 7);
    assert!(lines[2].starts_with("2,0.7,1.0,0.0,"));
}

#[test]
fn table_exact_json() {
    let v = json_ok(&["table", "--n", "3", "--q", "1/2", "--exact", "--format", "json"]);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["expectation"], "20/7");
    assert_eq!(rows[0]["variance"], "6/49");
}

#[test]
fn simulate_echoes_seed_and_is_reproducible() {
    let args = ["simulate", "--n", "10", "--q", "0.6", "--trials", "50000", "--seed", "99"];
    let a = json_ok(&args);
    let b = json_ok(&args);
    assert_eq!(a, b);
    assert_eq!(a["estimate"]["seed"], 99);
    assert_eq!(a["comparison"]["mean_ok"], true);

    let csv = qpath(&["simulate", "--n", "10", "--q", "3/5", "--trials", "1000", "--seed", "5", "--format", "csv"]);
    let text = stdout(&csv);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("n,q,trials,mean,sample_variance,stderr_mean,seed"));
    assert_eq!(lines[1].split(',').nth(6), Some("5"));
}
