//! End-to-end runs of the `rpcircle` binary on the bundled fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn rpcircle(args: &[&str], env_tol: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rpcircle"));
    cmd.args(args).env_remove("RPCIRCLE_TOL");
    if let Some(t) = env_tol {
        cmd.env("RPCIRCLE_TOL", t);
    }
    cmd.output().expect("run rpcircle")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

fn tmp(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn report_shape() {
    let out = rpcircle(&["check-function", &data("f1.json")], None);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    for key in ["schema_version", "toolkit_version", "command", "parameters", "tolerances", "checks", "passed", "details", "warnings", "wall_time_ms"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["command"], "check-function");
    assert_eq!(r["passed"], true);
    for c in r["checks"].as_array().unwrap() {
        assert!(["<=", ">=", "=="].contains(&c["comparison"].as_str().unwrap()));
    }
}

#[test]
fn flambda_csv_has_golden_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = tmp(&dir, "f1.csv");
    let out = rpcircle(&["check-function", &data("f1.json"), "--csv", csv_path.to_str().unwrap()], None);
    assert_eq!(code(&out), 0);
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["series", "x", "row", "col", "re", "im"]);
    let c0 = rdr
        .records()
        .map(Result::unwrap)
        .find(|r| &r[0] == "c" && r[1].parse::<f64>().unwrap() == 0.0)
        .expect("c_0 row");
    let expected = 2.0 * (1.0 - (-1.0f64).exp());
    assert!((c0[4].parse::<f64>().unwrap() - expected).abs() < 1e-14);
}

#[test]
fn sampled_cosine_is_rejected() {
    let out = rpcircle(&["check-function", &data("cos_samples.json")], None);
    assert_eq!(code(&out), 1);
    assert_eq!(report(&out)["passed"], false);
}

#[test]
fn qubit_kms_csv_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = tmp(&dir, "kms.csv");
    let out = rpcircle(&["kms", &data("qubit.json"), "--csv", csv_path.to_str().unwrap()], None);
    assert_eq!(code(&out), 0);
    let p0 = 1.0 / (1.0 + (-1.0f64).exp());
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 65);
    for row in &rows {
        let t: f64 = row[0].parse().unwrap();
        let expected = p0 * (-t).exp() + (1.0 - p0) * t.exp();
        assert!((row[1].parse::<f64>().unwrap() - expected).abs() < 1e-12, "t = {t}");
        assert!(row[2].parse::<f64>().unwrap().abs() < 1e-12);
    }
    assert!((rows[1][1].parse::<f64>().unwrap() - 0.992901).abs() < 5e-7);
}

#[test]
fn wrong_temperature_fails_kms_check() {
    let out = rpcircle(&["kms", &data("wrong_temperature.json")], None);
    assert_eq!(code(&out), 1);
    assert_eq!(check(&report(&out), "kms_condition")["passed"], false);
}

#[test]
fn realize_branches() {
    assert_eq!(code(&rpcircle(&["realize", &data("h_pair.json")], None)), 0);
    assert_eq!(code(&rpcircle(&["realize", &data("h_zero.json")], None)), 0);
    let asym = rpcircle(&["realize", &data("h_asym.json")], None);
    assert_eq!(code(&asym), 1);
    assert!(!asym.stderr.is_empty());
    assert_eq!(check(&report(&asym), "spectrum_symmetric")["passed"], false);
}

#[test]
fn standard_roundtrip_exit_codes() {
    assert_eq!(code(&rpcircle(&["standard-roundtrip", &data("pair_identity.json")], None)), 0);
    assert_eq!(code(&rpcircle(&["standard-roundtrip", &data("pair_diag.json")], None)), 0);
    assert_eq!(code(&rpcircle(&["standard-roundtrip", &data("pair_bad.json")], None)), 2);
}

#[test]
fn fit_recovers_single_atom_and_feeds_check_function() {
    let dir = tempfile::tempdir().unwrap();
    let measure = tmp(&dir, "mu.json");
    let out = rpcircle(
        &["fit", &data("f1_samples.csv"), "--lambda-grid", "0:4:0.5", "--measure-out", measure.to_str().unwrap()],
        None,
    );
    assert_eq!(code(&out), 0);
    let mu: Value = serde_json::from_str(&std::fs::read_to_string(&measure).unwrap()).unwrap();
    let atoms = mu["function"]["atoms"].as_array().unwrap();
    let heavy: Vec<&Value> = atoms.iter().filter(|a| a["weight"]["re"][0][0].as_f64().unwrap() > 1e-6).collect();
    assert_eq!(heavy.len(), 1);
    assert!((heavy[0]["lambda"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((heavy[0]["weight"]["re"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(code(&rpcircle(&["check-function", measure.to_str().unwrap()], None)), 0);
}

#[test]
fn noisy_fit_warns_but_passes() {
    let out = rpcircle(&["fit", &data("noisy_samples.csv"), "--lambda-grid", "0:4:0.5"], None);
    assert_eq!(code(&out), 0);
    assert!(!report(&out)["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn tolerance_from_env_and_flag() {
    let f1 = data("f1.json");
    let env = report(&rpcircle(&["check-function", &f1], Some("1e-6")));
    assert_eq!(env["tolerances"]["psd_rtol"].as_f64(), Some(1e-6));
    let flag = report(&rpcircle(&["check-function", &f1, "--tol", "1e-7"], Some("1e-6")));
    assert_eq!(flag["tolerances"]["psd_rtol"].as_f64(), Some(1e-7));
    let default = report(&rpcircle(&["check-function", &f1], None));
    assert_eq!(default["tolerances"]["psd_rtol"].as_f64(), Some(1e-9));
    assert_eq!(code(&rpcircle(&["check-function", &f1, "--tol", "-1"], None)), 2);
    assert_eq!(code(&rpcircle(&["check-function", &f1], Some("abc"))), 2);
}

#[test]
fn out_flag_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = tmp(&dir, "report.json");
    let out = rpcircle(&["realize", &data("h_pair.json"), "--out", path.to_str().unwrap()], None);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["command"], "realize");
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_version = tmp(&dir, "v2.json");
    std::fs::write(&bad_version, r#"{"schema_version":2,"h":{"re":[[1]]}}"#).unwrap();
    assert_eq!(code(&rpcircle(&["realize", bad_version.to_str().unwrap()], None)), 2);
    assert_eq!(code(&rpcircle(&["realize", "/nonexistent/input.json"], None)), 2);
    assert_eq!(code(&rpcircle(&["no-such-command"], None)), 2);
    assert_eq!(code(&rpcircle(&["fit", &data("f1_samples.csv"), "--lambda-grid", "4:0:1"], None)), 2);
    assert_eq!(code(&rpcircle(&["--help"], None)), 0);
}

#[test]
fn reports_are_deterministic_up_to_timing() {
    let strip = |o: &Output| {
        let mut v = report(o);
        v.as_object_mut().unwrap().remove("wall_time_ms");
        v
    };
    for args in [vec!["kms", "qubit.json"], vec!["standard-roundtrip", "pair_diag.json"]] {
        let path = data(args[1]);
        let a = rpcircle(&[args[0], &path, "--seed", "5"], None);
        let b = rpcircle(&[args[0], &path, "--seed", "5"], None);
        assert_eq!(strip(&a), strip(&b));
    }
}
