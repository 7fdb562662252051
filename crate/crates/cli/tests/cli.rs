use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn qpredec(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpredec"))
        .args(args)
        .current_dir(dir)
        .env_remove("QPREDEC_TIMEOUT")
        .output()
        .unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = qpredec(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rep_args(p: &str) -> Vec<String> {
    ["--code", &fixture("repetition_n3.json"), "--rounds", "3", "--p-data", p, "--p-meas", p]
        .map(String::from)
        .to_vec()
}

fn with<'a>(head: &[&'a str], tail: &'a [String]) -> Vec<&'a str> {
    head.iter().copied().chain(tail.iter().map(String::as_str)).collect()
}

#[test]
fn build_writes_pipeline_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let rep = rep_args("1e-3");
    let summary = ok(&with(&["build", "-o", "rep.json"], &rep), dir.path());
    assert!(summary.contains("depth"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rep.report.json")).unwrap()).unwrap();
    assert_eq!(report["single_error_failures"].as_array().unwrap().len(), 0);
    let pipeline: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rep.json")).unwrap()).unwrap();
    assert_eq!(pipeline["depth"], report["depth"]);
    assert_eq!(pipeline["stages"].as_array().unwrap().len() as u64, pipeline["depth"].as_u64().unwrap());
}

#[test]
fn empty_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.dem"), "# nothing\n").unwrap();
    let out = qpredec(&["build", "--dem", "empty.dem"], dir.path());
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn simulate_refuses_a_different_model_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    ok(&with(&["build", "-o", "p.json"], &rep_args("1e-3")), dir.path());
    let other = rep_args("2e-3");
    let out = qpredec(&with(&["simulate", "--pipeline", "p.json", "--shots", "100"], &other), dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--force"));
    let csv = ok(
        &with(&["simulate", "--pipeline", "p.json", "--shots", "100", "--force"], &other),
        dir.path(),
    );
    assert!(csv.starts_with("p,shots,coverage"));
}

#[test]
fn simulate_needs_an_iteration_budget_for_plain_models() {
    let dir = tempfile::tempdir().unwrap();
    let dem = fixture("surface_d3_nz_si1000_p0.001.dem");
    ok(&["build", "--dem", &dem, "-o", "s.json"], dir.path());
    let out = qpredec(&["simulate", "--pipeline", "s.json", "--dem", &dem, "--shots", "10"], dir.path());
    assert!(!out.status.success());
    let csv = ok(
        &["simulate", "--pipeline", "s.json", "--dem", &dem, "--shots", "200", "--distance", "3"],
        dir.path(),
    );
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "NA");
    assert_eq!(row[1], "200");
}

#[test]
fn sweep_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let rep = rep_args("1e-3");
    ok(
        &with(
            &["sweep", "--p-grid", "1e-3,2e-3", "--truncate-grid", "0,1", "--shots", "500", "-o", "s.csv"],
            &rep,
        ),
        dir.path(),
    );
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.results.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 4);
    // a fixed model has no p to sweep
    let dem = fixture("surface_d3_nz_si1000_p0.001.dem");
    let out = qpredec(&["sweep", "--dem", &dem, "--p-grid", "1e-3", "--bp-iters", "5"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn emit_round_trips_and_renders_netlists() {
    let dir = tempfile::tempdir().unwrap();
    ok(&with(&["build", "-o", "p.json"], &rep_args("1e-3")), dir.path());
    let json = ok(&["emit", "--pipeline", "p.json"], dir.path());
    assert_eq!(json, std::fs::read_to_string(dir.path().join("p.json")).unwrap());
    let net = ok(&["emit", "--pipeline", "p.json", "--format", "netlist-text"], dir.path());
    assert!(net.lines().any(|l| l.starts_with("STAGE 0 CLASS ")));
    assert!(net.lines().any(|l| l.starts_with("PRIM cond=D")));
}

#[test]
fn analyze_lists_every_class() {
    let dir = tempfile::tempdir().unwrap();
    ok(&with(&["build", "-o", "p.json"], &rep_args("1e-3")), dir.path());
    let text = ok(&["analyze", "p.json"], dir.path());
    let pipeline: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    for class in pipeline["classes"].as_array().unwrap() {
        assert!(text.matches(class.as_str().unwrap()).count() >= 2);
    }
}
