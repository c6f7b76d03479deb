use std::process::{Command, Output};

use serde_json::Value;

fn qcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcert"))
        .args(args)
        .env_remove("QCERT_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn qtable_values() {
    assert_eq!(stdout(&qcert(&["qtable", "--n", "9"])).trim(), "8");
    assert_eq!(stdout(&qcert(&["qtable", "--n", "0"])).trim(), "1");
    assert_eq!(
        stdout(&qcert(&["qtable", "--range", "0..9"])).trim(),
        "1,1,1,2,2,3,4,5,6,8"
    );
    let csv = stdout(&qcert(&["qtable", "--range", "8..=9", "--format", "csv"]));
    assert_eq!(csv, "n,q\n8,6\n9,8\n");
}

#[test]
fn exit_codes() {
    assert_eq!(qcert(&["verify", "no-such-theorem"]).status.code(), Some(64));
    assert_eq!(qcert(&["certify", "ineq9"]).status.code(), Some(64));
    assert_eq!(qcert(&["--bogus-flag"]).status.code(), Some(64));
    assert_eq!(qcert(&["qtable", "--n", "30000"]).status.code(), Some(65));
    assert_eq!(qcert(&["verify", "A", "--n-max", "1000"]).status.code(), Some(65));
}

#[test]
fn bounds_csv() {
    let o = qcert(&["bounds", "--range", "5019..5020", "-s", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,s,N,q_exact,lower,upper"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..3], ["5019", "2", "14"]);
    let q: f64 = row[3].parse().unwrap();
    let (l, u): (f64, f64) = (row[4].parse().unwrap(), row[5].parse().unwrap());
    assert!(l <= q && q <= u);
}

#[test]
fn coeffs_text() {
    let out = stdout(&qcert(&["coeffs", "--index", "0..1"]));
    let first = out.lines().next().unwrap();
    assert!(first.starts_with("Bhat[0,0] = "), "{first}");
    assert!(first.contains(" ~ 1.0"), "{first}");
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn verify_reports() {
    let o = qcert(&["verify", "double-turan", "--n-max", "5100", "--no-timing"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["threshold"], 273);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["n_star"], 5019);
    assert!(v.get("seconds").is_none());

    let o = qcert(&["verify", "laguerre3-companion", "--no-timing"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["threshold"], 715);
    assert_eq!(v["sharpness_witness"], 714);
}

#[test]
fn certify_crossover_within_window() {
    let o = qcert(&["certify", "ineq1", "--n-max", "5100"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "proved");
    assert!(v["n_star"].as_u64().unwrap() <= 5019);
    assert!(v["crossover"].as_u64().unwrap() <= 2469);
}

#[test]
fn reports_are_reproducible() {
    let args = ["verify", "A", "--n-max", "5100", "--no-timing"];
    let a = qcert(&args);
    let b = qcert(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
