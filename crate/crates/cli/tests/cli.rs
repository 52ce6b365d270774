use std::path::Path;
use std::process::{Command, Output};

fn rpvtest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpvtest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn simulate_to(path: &Path, extra: &[&str]) {
    let p = path.to_str().unwrap();
    let mut args = vec!["simulate", "--r", "0.1", "--mu", "3", "--sigma2", "1", "--n", "1500", "--seed", "11", "--csv", p];
    args.extend_from_slice(extra);
    let out = rpvtest(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let args = ["simulate", "--r", "0.05", "--mu", "4", "--sigma2", "1", "--n", "800", "--seed", "42", "--r-t", "0.06"];
    let a = rpvtest(&args);
    let b = rpvtest(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("group,order_value\n"));
    assert_eq!(text.lines().count(), 1 + 1600);
    // report goes to stderr when the CSV is on stdout
    assert!(String::from_utf8_lossy(&a.stderr).contains("verdict"));
}

#[test]
fn identical_groups_give_no_change() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("same.csv");
    let mut text = String::from("group,order_value\n");
    for v in ["0", "0", "12.5", "0", "40", "7.25", "0", "3"] {
        text.push_str(&format!("control,{v}\ntreatment,{v}\n"));
    }
    std::fs::write(&csv, text).unwrap();
    let json = dir.path().join("report.json");
    let out = rpvtest(&["two-part", "--input", csv.to_str().unwrap(), "--out", json.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("NoChange"));

    let report = rpv_core::report::AnalysisReport::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report.inputs_digest, rpv_core::io::digest(&rpv_core::io::load_csv(&csv).unwrap()));
    assert!(report.verdict.contains("NoChange"));
}

#[test]
fn pipeline_and_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    simulate_to(&csv, &["--r-t", "0.14", "--mu-t", "2.7"]);
    let json = dir.path().join("r.json");
    let out = rpvtest(&[
        "pipeline",
        "--input",
        csv.to_str().unwrap(),
        "--parametric",
        "lrt",
        "--out",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = rpv_core::report::AnalysisReport::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report.config_echo.command, "pipeline");
    assert_eq!(report.stage.len(), report.result.len());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), report.render_text());
}

#[test]
fn qq_emits_one_row_per_purchase() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    simulate_to(&csv, &[]);
    let data = rpv_core::io::load_csv(&csv).unwrap();
    let k = data.control.iter().filter(|v| **v > 0.0).count();
    let out = rpvtest(&["qq", "--input", csv.to_str().unwrap(), "--group", "control"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theoretical_z,empirical_z"));
    assert_eq!(lines.count(), k);
}

#[test]
fn usage_and_operational_errors_exit_nonzero() {
    assert!(!rpvtest(&["two-part", "--input", "x.csv", "--bogus"]).status.success());
    assert!(!rpvtest(&["delta", "--input", "x.csv", "--variance-mode", "nope"]).status.success());
    let missing = rpvtest(&["two-part", "--input", "/nonexistent/file.csv"]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("error"));

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "group,order_value\ncontrol,1\ntreatment,-3\n").unwrap();
    let out = rpvtest(&["two-part", "--input", csv.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));
}
