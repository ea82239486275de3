use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cli_orchestrator::{execute, parse_config, EXIT_CHECK, EXIT_NUMERICAL, EXIT_PASS, EXIT_USAGE};

fn nhtrap(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nhtrap"));
    cmd.args(args);
    match workers {
        Some(w) => cmd.env("NHTRAP_WORKERS", w),
        None => cmd.env_remove("NHTRAP_WORKERS"),
    };
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn trap_find_prints_schwarzschild_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "kerr.mass = 1.0\nkerr.spin = 0.0\ncommand = trap-find\n");
    let out_dir = dir.path().join("out");
    let out = nhtrap(&["trap-find", "--config", &cfg, "--out", out_dir.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "r(beta)=3.000000000000, exponent=10.392304845413\n");
    assert!(!out_dir.join("failures.json").exists());
}

#[test]
fn usage_and_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.cfg", "kerr.mass = 1.0\nkerr.spin = 1.5\n");
    let out = nhtrap(&["trap-find", "--config", &bad], None);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kerr.spin"));

    let syntax = write(dir.path(), "syntax.cfg", "seed = 1\nkerr.mass 1.0\n");
    let out = nhtrap(&["trap-find", "--config", &syntax], None);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let good = write(dir.path(), "good.cfg", "command = perturb\n");
    assert_eq!(nhtrap(&["trap-find", "--config", &good], None).status.code(), Some(EXIT_USAGE));
    assert_eq!(nhtrap(&["no-such-command", "--config", &good], None).status.code(), Some(EXIT_USAGE));
    assert_eq!(nhtrap(&["trap-find"], None).status.code(), Some(EXIT_USAGE));
    let missing = dir.path().join("missing.cfg");
    assert_eq!(nhtrap(&["trap-find", "--config", missing.to_str().unwrap()], None).status.code(), Some(EXIT_USAGE));
    let plain = write(dir.path(), "plain.cfg", "");
    assert_eq!(nhtrap(&["trap-find", "--config", &plain], Some("zero")).status.code(), Some(EXIT_USAGE));
}

#[test]
fn unwritable_output_dir_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("file");
    fs::write(&file, "x").unwrap();
    let mut c = parse_config("command = trap-find").unwrap();
    c.output_dir = file.join("sub");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(execute(&c, &mut out, &mut err), EXIT_USAGE);
}

#[test]
fn spectrum_gap_is_deterministic_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "gap.cfg",
        "command = spectrum-gap\nspectrum.model = toy_sech2\nh_list = 0.2, 0.1\nspectrum.axis = 0.0\nseed = 3\n",
    );
    let mut runs = Vec::new();
    for (i, w) in ["1", "2"].iter().enumerate() {
        let out_dir = dir.path().join(format!("run{i}"));
        let out = nhtrap(&["spectrum-gap", "--config", &cfg, "--out", out_dir.to_str().unwrap()], Some(w));
        assert_eq!(out.status.code(), Some(EXIT_PASS), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);
        let gaps = fs::read_to_string(out_dir.join("gaps.csv")).unwrap();
        let eigs = fs::read_to_string(out_dir.join("eigenvalues.csv")).unwrap();
        runs.push((gaps, eigs));
        let names: Vec<_> = fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 2, "{names:?}");
    }
    assert_eq!(runs[0], runs[1]);
    let gaps = &runs[0].0;
    assert!(gaps.starts_with("h,gap,nu,norm_axis_z0,runtime_s\n"));
    assert_eq!(gaps.lines().count(), 3);
    assert!(gaps.lines().skip(1).all(|l| l.ends_with(",0.00000000000e0")));
}

#[test]
fn failed_checks_exit_1_with_failures_json() {
    let dir = tempfile::tempdir().unwrap();
    // a drift tolerance this tight cannot be met
    let cfg = write(
        dir.path(),
        "flow.cfg",
        "command = flow-integrate\nkerr.spin = 0.1\nflow.time = 5\nflow.samples = 10\ntolerances.drift = 1e-30\nseed = 4\n",
    );
    let out_dir = dir.path().join("out");
    let out = nhtrap(&["flow-integrate", "--config", &cfg, "--out", out_dir.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(EXIT_CHECK));
    let f: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("failures.json")).unwrap()).unwrap();
    assert_eq!(f["command"], "flow-integrate");
    assert!(f["failures"].as_array().unwrap().iter().any(|c| c["check"].as_str().unwrap().starts_with("drift")));
    let orbit = fs::read_to_string(out_dir.join("orbit.csv")).unwrap();
    assert!(orbit.starts_with("t,r,theta,phi,xi,alpha,beta,p,beta_c,carter\n"));
    assert_eq!(orbit.lines().count(), 12);

    // a passing rerun removes the stale failures.json
    let cfg = write(dir.path(), "flow2.cfg", "command = flow-integrate\nflow.time = 5\nflow.samples = 10\nseed = 4\n");
    let out = nhtrap(&["flow-integrate", "--config", &cfg, "--out", out_dir.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(EXIT_PASS), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out_dir.join("failures.json").exists());
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // beyond the spin range where the critical beta is computed
    let mut c = parse_config("command = trap-find\nkerr.spin = 0.9").unwrap();
    c.output_dir = dir.path().to_path_buf();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(execute(&c, &mut out, &mut err), EXIT_NUMERICAL);
    let f: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("failures.json")).unwrap()).unwrap();
    assert!(f["error"].is_string());
}

#[test]
fn escape_check_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = parse_config("command = escape-check\nescape.model = toy\nescape.order_samples = 2000").unwrap();
    c.output_dir = dir.path().to_path_buf();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(execute(&c, &mut out, &mut err), EXIT_PASS, "{}", String::from_utf8_lossy(&err));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("escape_report.json")).unwrap()).unwrap();
    assert_eq!(r["c1"], 4.0);
    assert!(r["N"].as_u64().unwrap() <= 4);
    assert_eq!(r["bracket_min"], 2.0);
    assert!(r["violations"].as_array().unwrap().is_empty());
}

#[test]
fn resolvent_checks_bound_and_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = parse_config("command = spectrum-resolvent\nspectrum.model = toy_sech2\nh_list = 0.2, 0.1\nspectrum.random_z = 10").unwrap();
    c.output_dir = dir.path().to_path_buf();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(execute(&c, &mut out, &mut err), EXIT_PASS, "{}", String::from_utf8_lossy(&err));
    let csv = fs::read_to_string(dir.path().join("resolvent.csv")).unwrap();
    // 5 axis points and 10 random points per h
    assert_eq!(csv.lines().count(), 1 + 2 * 15);
}
