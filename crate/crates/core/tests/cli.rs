use std::process::Command;

fn bvcalc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bvcalc"))
}

#[test]
fn list_names_every_scenario() {
    let out = bvcalc().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["sawtooth-oscillation", "example1", "example2", "x-dependent-F-lsc"] {
        assert!(text.contains(id), "{id} missing from:\n{text}");
    }
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bvcalc()
        .args(["run", "--scenario", "no-such-thing", "--output"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown scenario"));
}

#[test]
fn invalid_config_is_a_usage_error() {
    let out = bvcalc().args(["run", "--scenario", "example2", "--resolution", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let status = bvcalc()
        .args(["run", "--scenario", "atom-absorbs-jump", "--jmax", "16", "--seed", "3", "--output"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["scenario"], "atom-absorbs-jump");
    assert_eq!(report["passed"], true);
    assert_eq!(report["config"]["seed"], 3);
    assert!((report["F_u"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(report["builder_hash"].as_str().unwrap().len(), 64);

    let dir = tempfile::tempdir().unwrap();
    let status = bvcalc()
        .args(["run", "--scenario", "sawtooth-oscillation", "--jmax", "64", "--output"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.path().join("tables/lsc.csv")).unwrap();
    assert!(csv.starts_with("j,value,gap\n8,"));
    let dat = std::fs::read_to_string(dir.path().join("generation.dat")).unwrap();
    assert_eq!(dat.lines().count(), 4);
    assert!(dat.lines().all(|l| l.split(' ').count() == 2));
}

#[test]
fn failing_expectation_exits_nonzero() {
    // at jmax = 8 the sawtooth pairing gap is far above 2%
    let dir = tempfile::tempdir().unwrap();
    let out = bvcalc()
        .args(["run", "--scenario", "sawtooth-oscillation", "--jmax", "8", "--output"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn oracle_reads_a_case_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("case.json");
    std::fs::write(
        &path,
        r#"{"interval": [0, 1], "breaks": [0.5], "pieces": [[0, 1], [1, 1]],
            "density_breaks": [], "density": [2], "atoms": [[0.5, 1]],
            "integrand": "norm", "include_boundary": false}"#,
    )
    .unwrap();
    let out = bvcalc().args(["oracle", "--case"]).arg(&path).output().unwrap();
    assert!(out.status.success());
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((v - 2.0).abs() < 1e-10);
}
