use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn radnet(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radnet"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn build_reports_the_expected_widths() {
    let dir = tempfile::tempdir().unwrap();
    let out = radnet(dir.path(), &["build", "--override", "build.n=8", "--override", "build.d=2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["widths"], serde_json::json!([2, 6, 3, 27]));
    assert!(dir.path().join("net.json").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["build", "--override", "build.n=4", "--seed", "11"];
    assert!(radnet(a.path(), &args).status.success());
    assert!(radnet(b.path(), &args).status.success());
    assert_eq!(fs::read(a.path().join("net.json")).unwrap(), fs::read(b.path().join("net.json")).unwrap());
    // The echoed config records the output directory, which differs.
    let report = |p: &Path| {
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("report.json")).unwrap()).unwrap();
        v["config"]["out"] = serde_json::Value::Null;
        v
    };
    assert_eq!(report(a.path()), report(b.path()));
}

#[test]
fn unknown_activation_exits_with_configuration_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = radnet(dir.path(), &["build", "--activation", "relu"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_n_list_exits_with_configuration_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = radnet(dir.path(), &["rate-approx", "--override", "rate_approx.n_list=[]"]);
    assert_eq!(out.status.code(), Some(2));
    let out = radnet(dir.path(), &["audit", "--override", "audit.n_list=[]"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pack_passes_for_small_families() {
    for (n_star, pairs) in [(4usize, 120usize), (1, 1)] {
        let dir = tempfile::tempdir().unwrap();
        let out = radnet(dir.path(), &["pack", "--override", &format!("pack.n_star={n_star}")]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let rows = csv_rows(&dir.path().join("pack.csv"));
        assert_eq!(rows.len(), pairs);
        assert!(rows.iter().all(|r| r[5] == "true"));
    }
}

#[test]
fn pack_refuses_to_enumerate_huge_families() {
    let dir = tempfile::tempdir().unwrap();
    let out = radnet(dir.path(), &["pack", "--override", "pack.n_star=20"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn small_learning_sweep_writes_a_finite_slope() {
    let args = [
        "rate-learn",
        "--override",
        "rate_learn.m_list=[16, 32, 64, 128, 256]",
        "--override",
        "rate_learn.trials=3",
        "--override",
        "rate_learn.n_test=500",
        "--override",
        "rate_learn.optimizer.steps=150",
        "--override",
        "rate_learn.optimizer.epochs=0.0",
        "--override",
        "rate_learn.optimizer.restarts=1",
    ];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let out = radnet(a.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(radnet(b.path(), &args).status.success());
    let csv = a.path().join("rate_learn.csv");
    let rows = csv_rows(&csv);
    assert!(rows.len() >= 6);
    let slope_row = rows.last().unwrap();
    assert_eq!(slope_row[0], "fitted_slope");
    assert!(slope_row[3].parse::<f64>().unwrap().is_finite());
    assert_eq!(fs::read(&csv).unwrap(), fs::read(b.path().join("rate_learn.csv")).unwrap());
}

#[test]
fn audit_checks_a_built_net() {
    let dir = tempfile::tempdir().unwrap();
    assert!(radnet(dir.path(), &["build", "--override", "build.n=4"]).status.success());
    let net = dir.path().join("net.json");
    let out = radnet(dir.path(), &["audit", "--override", &format!("audit.net=\"{}\"", net.display())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("lower_bounds.csv"));
    assert_eq!(rows.len(), 6);
}
