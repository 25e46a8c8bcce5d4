use std::fs;
use std::process::{Command, Stdio};

use shocklab_cli::{run_config, validate, ExperimentKind, Report, RunError, ScenarioConfig, Table};

fn shocklab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_shocklab"));
    c.stdout(Stdio::null()).stderr(Stdio::null());
    c
}

#[test]
fn lax_violation_is_reported_before_running() {
    let cfg = ScenarioConfig::parse("states.left = -1\nstates.right = 1\n", Some(ExperimentKind::ShockShift)).unwrap();
    let errs = validate(&cfg).unwrap_err();
    assert!(errs.iter().any(|e| e.contains("Lax")), "{errs:?}");
}

#[test]
fn every_violation_is_listed() {
    let text = "nu = -0.1\ngrid.dx = 0.3\nperturbation.left.shape = sine\nperturbation.right.shape = cosine\n";
    let cfg = ScenarioConfig::parse(text, Some(ExperimentKind::BurgersCoincidence)).unwrap();
    let errs = validate(&cfg).unwrap_err();
    assert!(errs.iter().any(|e| e.starts_with("nu:")), "{errs:?}");
    assert!(errs.iter().any(|e| e.contains("divide") || e.starts_with("grid")), "{errs:?}");
    assert!(errs.iter().any(|e| e.contains("identical")), "{errs:?}");
}

#[test]
fn sweep_needs_a_decade_of_viscosities() {
    let cfg = ScenarioConfig::parse("nu = [0.4, 0.3, 0.2, 0.1]\n", Some(ExperimentKind::ViscositySweep)).unwrap();
    let errs = validate(&cfg).unwrap_err();
    assert!(errs.iter().any(|e| e.contains("decade")), "{errs:?}");
}

#[test]
fn coincidence_rejects_other_fluxes() {
    let cfg = ScenarioConfig::parse("flux.kind = quadratic\nflux.a = 2\n", Some(ExperimentKind::BurgersCoincidence)).unwrap();
    let errs = validate(&cfg).unwrap_err();
    assert!(errs.iter().any(|e| e.contains("Burgers")), "{errs:?}");
}

#[test]
fn validation_failure_leaves_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::parse("states.left = -1\nstates.right = 1\n", Some(ExperimentKind::ShockShift)).unwrap();
    let out = dir.path().join("run");
    assert!(matches!(run_config(&cfg, &out, 1), Err(RunError::Validation(_))));
    assert!(!out.exists());
}

#[test]
fn profile_run_writes_documented_csv() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_config(&ScenarioConfig::default_for(ExperimentKind::Profile), dir.path(), 1).unwrap();
    assert!(report.all_passed());
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(csv.starts_with("x,phi,g,gprime,ratio\n"));
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("status: pass"));
}

#[test]
fn sweep_writes_rate_schema() {
    let dir = tempfile::tempdir().unwrap();
    let _ = run_config(&ScenarioConfig::default_for(ExperimentKind::ViscositySweep), dir.path(), 2).unwrap();
    let csv = fs::read_to_string(dir.path().join("rate.csv")).unwrap();
    assert!(csv.starts_with("nu,discrepancy,log_nu,log_discrepancy\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn shift_csv_has_documented_header() {
    let dir = tempfile::tempdir().unwrap();
    let text = "time.horizon = 1\ngrid.dx = 1/128\n";
    let cfg = ScenarioConfig::parse(text, Some(ExperimentKind::ShockShift)).unwrap();
    run_config(&cfg, dir.path(), 1).unwrap();
    let csv = fs::read_to_string(dir.path().join("shift.csv")).unwrap();
    assert!(csv.starts_with("t,shift,shift_minus_st,sup_dist\n"));
}

#[test]
fn empty_report_writes_only_a_warning_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = Report::new("empty");
    r.tables.push(Table::new("shift.csv", &["t", "shift", "shift_minus_st", "sup_dist"]));
    r.write(dir.path()).unwrap();
    assert!(!dir.path().join("shift.csv").exists());
    assert!(fs::read_to_string(dir.path().join("summary.txt")).unwrap().contains("WARN"));
}

#[test]
fn exit_status_encodes_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "states.left = -1\nstates.right = 1\n").unwrap();
    let status = shocklab()
        .args(["shock-shift", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("a"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));

    let status = shocklab()
        .args(["profile", "--out"])
        .arg(dir.path().join("b"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    // The fan has not formed by t = 2, so the gap check fails.
    let short = dir.path().join("short.cfg");
    fs::write(&short, "time.horizon = 2\ntime.samples = [1, 2]\ngrid.half_width = 20\n").unwrap();
    let status = shocklab()
        .args(["rarefaction", "--config"])
        .arg(&short)
        .arg("--out")
        .arg(dir.path().join("c"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_keys_are_rejected() {
    let err = ScenarioConfig::parse("grid.dy = 1\n", Some(ExperimentKind::Profile)).unwrap_err();
    assert!(err.to_string().contains("grid.dy"));
}
