use std::process::{Command, Output};

use serde_json::{json, Value};

fn knzeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knzeta"))
        .args(args)
        .env_remove("KN_ZETA_MEMO_DIR")
        .output()
        .expect("spawn knzeta")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Four tachyonic momenta in 26 dimensions: k_i·k_i = 2, sum zero.
fn momenta() -> Value {
    let r3 = 3f64.sqrt();
    let (c, s) = (0.6f64, 0.8f64);
    let mut rows = vec![vec![0.0; 26]; 4];
    rows[0][0] = 1.0;
    rows[0][1] = r3;
    rows[1][0] = 1.0;
    rows[1][1] = -r3;
    rows[2][0] = -1.0;
    rows[2][1] = r3 * c;
    rows[2][2] = r3 * s;
    rows[3][0] = -1.0;
    rows[3][1] = -r3 * c;
    rows[3][2] = -r3 * s;
    json!(rows)
}

fn eval_value(out: &str) -> (f64, f64) {
    let v: Value = serde_json::from_str(out).unwrap();
    let z = &v["values"][0]["value"];
    (z["re"].as_f64().unwrap(), z["im"].as_f64().unwrap())
}

#[test]
fn compute_json_has_three_denominator_factors() {
    let o = knzeta(&["compute", "--N", "4", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["den"].as_array().unwrap().len(), 3);
}

#[test]
fn compute_text_shows_collinear_factor() {
    let o = knzeta(&["compute", "--N", "4"]);
    assert!(o.status.success());
    assert!(
        stdout(&o).contains("1 - p^(1 + s_1_2 + s_3_2)"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn compute_json_round_trips_through_core() {
    let o = knzeta(&["compute", "--N", "5", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let f = knzeta::RationalFn::from_json(&v).unwrap();
    let mut e = knzeta::Engine::new(5).unwrap();
    let direct = e
        .zn_sectors()
        .unwrap()
        .expand(Some(knzeta::ZN_EXPAND_BUDGET))
        .unwrap();
    assert_eq!(f, direct);
}

#[test]
fn compute_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z4.json");
    let o = knzeta(&[
        "compute",
        "--N",
        "4",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&o));
}

#[test]
fn n_out_of_range_is_usage_error() {
    let o = knzeta(&["compute", "--N", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("NOutOfRange"), "{}", stderr(&o));
}

#[test]
fn bad_flag_is_usage_error() {
    let o = knzeta(&["compute", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_warns_for_nonnegative_point() {
    let o = knzeta(&[
        "eval",
        "--N",
        "4",
        "--p",
        "2",
        "--s",
        "s_1_2=0.5",
        "--s",
        "s_3_2=0.25",
    ]);
    assert!(o.status.success());
    assert!(stderr(&o)
        .contains("nonnegative real part: integral diverges; value is the analytic continuation"));
}

#[test]
fn eval_inside_domain_is_silent() {
    let o = knzeta(&[
        "eval",
        "--N",
        "4",
        "--p",
        "3",
        "--s",
        "s_1_2=-0.6",
        "--s",
        "s_3_2=-0.6",
    ]);
    assert!(o.status.success());
    assert!(stderr(&o).is_empty(), "{}", stderr(&o));
}

#[test]
fn eval_outside_domain_names_violations() {
    let o = knzeta(&[
        "eval",
        "--N",
        "4",
        "--p",
        "2",
        "--s",
        "s_1_2=-0.2",
        "--s",
        "s_3_2=-0.3",
    ]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("C1'"), "{}", stderr(&o));
}

#[test]
fn eval_missing_variable() {
    let o = knzeta(&["eval", "--N", "4", "--p", "2", "--s", "s_1_2=-0.6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("MissingAssignment"), "{}", stderr(&o));
}

#[test]
fn kinematics_agree_with_explicit_s() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.json");
    std::fs::write(&path, momenta().to_string()).unwrap();
    let a = knzeta(&[
        "eval",
        "--N",
        "4",
        "--p",
        "3",
        "--format",
        "json",
        "--momenta",
        path.to_str().unwrap(),
    ]);
    assert!(a.status.success(), "{}", stderr(&a));
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    let s12 = v["point"]["s_1_2"]["re"].as_f64().unwrap();
    let s32 = v["point"]["s_3_2"]["re"].as_f64().unwrap();
    assert!((s12 - -4.0).abs() < 1e-12);
    let b = knzeta(&[
        "eval",
        "--N",
        "4",
        "--p",
        "3",
        "--format",
        "json",
        "--s",
        &format!("s_1_2={s12}"),
        "--s",
        &format!("s_3_2={s32}"),
    ]);
    let (x, y) = (eval_value(&stdout(&a)), eval_value(&stdout(&b)));
    assert!((x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12);
}

#[test]
fn kinematics_violation_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.json");
    let mut m = momenta();
    m[0][3] = json!(0.5);
    std::fs::write(&path, m.to_string()).unwrap();
    let o = knzeta(&[
        "eval",
        "--N",
        "4",
        "--p",
        "2",
        "--momenta",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("KinematicsViolation"), "{}", stderr(&o));

    let short: Value = json!(vec![vec![0.0; 25]; 4]);
    std::fs::write(&path, short.to_string()).unwrap();
    let o = knzeta(&[
        "eval",
        "--N",
        "4",
        "--p",
        "2",
        "--momenta",
        path.to_str().unwrap(),
    ]);
    assert!(stderr(&o).contains("KinematicsViolation"));
}

#[test]
fn verify_passes_and_fault_fails() {
    let ok = knzeta(&["verify", "--N", "4", "--p", "2", "--samples", "20000"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let bad = knzeta(&[
        "verify",
        "--N",
        "4",
        "--p",
        "2",
        "--samples",
        "20000",
        "--inject-fault",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL"));
}

#[test]
fn verify_json_report() {
    let o = knzeta(&[
        "verify",
        "--N",
        "4",
        "--p",
        "3",
        "--format",
        "json",
        "--samples",
        "20000",
    ]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!v["checks"].as_array().unwrap().is_empty());
}

#[test]
fn poles_n4() {
    let o = knzeta(&["poles", "--N", "4", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 3);
    assert!(arr
        .iter()
        .all(|h| !h["shapes"].as_array().unwrap().is_empty()));
}

#[test]
fn domain_witness_passes() {
    let o = knzeta(&["domain", "--N", "5", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["all_pass"], json!(true));
    assert_eq!(v["witness"]["s_1_2"], json!("-7/12"));
}

#[test]
fn domain_zero_point_violates_c1() {
    let o = knzeta(&["domain", "--N", "4", "--s", "s_1_2=0", "--s", "s_3_2=0"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("C1': FAIL"), "{}", stdout(&o));
}

#[test]
fn memo_dir_is_populated() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_knzeta"))
        .args(["compute", "--N", "5"])
        .env("KN_ZETA_MEMO_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_some());
    let again = Command::new(env!("CARGO_BIN_EXE_knzeta"))
        .args(["compute", "--N", "5"])
        .env("KN_ZETA_MEMO_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(stdout(&o), stdout(&again));
}
