use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_circumnav"))
}

fn preset(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presets").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn case1_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["run"])
        .arg(preset("case1"))
        .arg("--out")
        .arg(dir.path())
        .args(["--override", "sim.t_end=15.0", "--verify"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("telemetry.csv")).unwrap();
    assert!(csv.starts_with("t,a0_x,a0_y,"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
    assert_eq!(report["schema_version"], 1);
}

#[test]
fn small_standoff_warns_and_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("run")
        .arg(preset("case1.toml"))
        .arg("--out")
        .arg(dir.path())
        .args(["--override", "params.d=0.2", "--override", "sim.t_end=1.0", "--verify"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("warning"));
    assert!(stderr(&o).contains("not certified"));
    assert!(dir.path().join("report.json").is_file());
}

#[test]
fn missing_file_and_bad_override_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["run", "no/such/scenario"]).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not found"));

    let o = bin()
        .arg("run")
        .arg(preset("case1"))
        .arg("--out")
        .arg(dir.path())
        .args(["--override", "params.nonsense=1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mincircle_oracle() {
    let o = bin().args(["oracle", "mincircle", "(-2,0) (4,5) (2,0) (1,1)"]).output().unwrap();
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("center (1.000000000, 2.500000000)"), "{out}");
    assert!(out.contains("radius 3.905124838"), "{out}");

    let o = bin().args(["oracle", "mincircle", "(0,0)"]).output().unwrap();
    assert!(stdout(&o).contains("radius 0.000000000"));
}

#[test]
fn hulldist_oracle_defaults_to_case1_targets() {
    let o = bin().args(["oracle", "hulldist", "(8,0)"]).output().unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("distance 5.5708"), "{}", stdout(&o));

    let o = bin().args(["oracle", "hulldist", "(0,0)", "--points", "(1,1) (2,1)"]).output().unwrap();
    assert!(stdout(&o).contains("distance 1.414213562"), "{}", stdout(&o));
}

#[test]
fn malformed_points_exit_1() {
    for args in [
        vec!["oracle", "mincircle", "(1,2) (3)"],
        vec!["oracle", "mincircle", "(a,b)"],
        vec!["oracle", "hulldist", "(1,2) (3,4)"],
    ] {
        let o = bin().args(&args).output().unwrap();
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn figures_are_deterministic() {
    let run = |dir: &std::path::Path| {
        let o = bin()
            .arg("run")
            .arg(preset("case2"))
            .env("CIRCUMNAV_OUT", dir)
            .args(["--override", "sim.t_end=2.0", "--plot"])
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(a.path());
    run(b.path());
    for name in ["trajectory.svg", "distance.svg", "speed.svg", "errors.svg", "gaps.svg", "telemetry.csv", "report.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let gaps = std::fs::read_to_string(a.path().join("gaps.svg")).unwrap();
    assert!(gaps.contains("agent 3"));
}
