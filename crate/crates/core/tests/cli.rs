use std::path::Path;
use std::process::{Command, Output};

const PI_6: &str = "0.5235987755982988";
const PI_4: &str = "0.7853981633974483";

fn qmdisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmdisc")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Data rows of a CSV body, keyed by header name.
fn rows(body: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = body.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let data = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, data)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn curves_example() {
    let out = qmdisc(&["curves", "--theta", PI_6, "--pi-grid", "0:0.5:0.01"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let body = stdout(&out);
    assert!(body.starts_with("# qmdisc "));
    assert!(body.ends_with('\n'));
    let (header, data) = rows(&body);
    assert_eq!(data.len(), 51);
    let adv = column(&header, "advantage");
    assert!(data.iter().all(|r| r[adv].parse::<f64>().unwrap() >= 0.0));
}

#[test]
fn curves_at_pi_over_4() {
    let out = qmdisc(&["curves", "--theta", PI_4, "--pi-grid", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, data) = rows(&stdout(&out));
    assert_eq!(data.len(), 1);
    for name in ["ps_entangled", "ps_single_optimal"] {
        let v: f64 = data[0][column(&header, name)].parse().unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{name} = {v}");
    }
}

#[test]
fn theta_out_of_range() {
    let out = qmdisc(&["curves", "--theta", "2.0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("theta outside [0, pi/4]"));
    assert!(out.stdout.is_empty());
}

#[test]
fn oracle_target_out_of_range() {
    let out = qmdisc(&["oracle", "--theta", PI_6, "--pi", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_uncertified_exit() {
    let out = qmdisc(&["oracle", "--theta", PI_6, "--pi", "0.3", "--tol", "1e-15", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(!out.stdout.is_empty(), "result is still written");
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate",
        "--mode",
        "intermediate",
        "--theta",
        PI_6,
        "--t-grid",
        "0.2:0.6:0.4",
        "--trials",
        "20000",
        "--seed",
        "9",
    ];
    let (a, b) = (qmdisc(&args), qmdisc(&args));
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn unambiguous_example() {
    let out = qmdisc(&["simulate", "--mode", "unambiguous", "--theta", PI_6, "--trials", "10000"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, data) = rows(&stdout(&out));
    assert_eq!(data.len(), 11);
    let pe = column(&header, "p_error");
    assert!(data.iter().all(|r| r[pe].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn convexity_concave_branch() {
    let out = qmdisc(&["convexity", "--c-grid", "0.5", "--pi-grid", "0.5", "--branch", "concave"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("-3.4641016151"));
}

fn write_with_manifest(dir: &Path) -> (String, String) {
    let data = dir.join("hull.csv").to_string_lossy().into_owned();
    let out = qmdisc(&["hull", "--c", "0.5", "--samples", "2000", "--seed", "4", "--out", &data]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    (data.clone(), format!("{data}.manifest.json"))
}

#[test]
fn replay_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let (data, manifest) = write_with_manifest(dir.path());
    let again = dir.path().join("again.csv").to_string_lossy().into_owned();
    let out = qmdisc(&["replay", &manifest, "--out", &again]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(std::fs::read(&data).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn replay_detects_output_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let (_, manifest) = write_with_manifest(dir.path());
    let text = std::fs::read_to_string(&manifest).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    json["outputs"][0]["sha256"] = "0".repeat(64).into();
    std::fs::write(&manifest, serde_json::to_string_pretty(&json).unwrap()).unwrap();
    let out = qmdisc(&["replay", &manifest]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn replay_rejects_edited_params() {
    let dir = tempfile::tempdir().unwrap();
    let (_, manifest) = write_with_manifest(dir.path());
    let text = std::fs::read_to_string(&manifest).unwrap();
    assert!(text.contains("\"samples\": 2000"));
    std::fs::write(&manifest, text.replace("\"samples\": 2000", "\"samples\": 2001")).unwrap();
    let out = qmdisc(&["replay", &manifest]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn missing_manifest_is_io_error() {
    let out = qmdisc(&["replay", "/nonexistent/qmdisc.manifest.json"]);
    assert_eq!(out.status.code(), Some(1));
}
