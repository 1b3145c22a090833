use std::fs;
use std::process::Command;

fn qrelax() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qrelax"))
}

fn write_config(dir: &std::path::Path, model: &str, sweep: &str) -> std::path::PathBuf {
    let path = dir.join("cfg.toml");
    let text = format!(
        "{model}\n{sweep}\n[window]\ntau0 = 1e5\nspan = 40.0\nn_steps = 100\n[output]\ndir = \"{}\"\n",
        dir.join("out").display()
    );
    fs::write(&path, text).unwrap();
    path
}

const SMALL_DICKE: &str = "[model]\nkind = \"dicke\"\nj = 2\nn_max = 40";

#[test]
fn fig23_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        SMALL_DICKE,
        "[sweep]\nlambda0 = [0.4]\ndelta_lambda = [0.1]\nn0 = [3, 9]",
    );
    let out = qrelax().arg("fig23").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/fig23.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("out/fig23.meta.txt").exists());
}

#[test]
fn invalid_config_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_DICKE, "[sweep]\nlambda0 = []\nn0 = [0]");
    let out = qrelax().arg("fig1").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lambda0") && err.contains("n0"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_key_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_DICKE, "[sweep]\nlambda0 = [0.1]\nbogus = 3");
    assert_eq!(qrelax().arg("fig1").arg(&cfg).status().unwrap().code(), Some(1));
}

#[test]
fn numerical_failure_exits_with_2() {
    // Too few converged levels for the spacing diagnostics.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_DICKE, "[sweep]\nlambda = [0.3]");
    assert_eq!(qrelax().arg("spacing").arg(&cfg).status().unwrap().code(), Some(2));
}

#[test]
fn failed_check_exits_with_3() {
    // A photon cutoff far too small for λ = 1.5.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\nkind = \"dicke\"\nj = 2\nn_max = 8",
        "[sweep]\nlambda0 = [1.5]\ndelta_lambda = [0.1]\nn0 = [20]",
    );
    let out = qrelax().arg("check").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let csv = fs::read_to_string(dir.path().join("out/check.csv")).unwrap();
    assert!(csv.contains("truncation") && csv.contains("false"));
}

#[test]
fn check_passes_on_a_converged_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        SMALL_DICKE,
        "[sweep]\nlambda0 = [0.3]\ndelta_lambda = [0.1]\nn0 = [5]",
    );
    let out = qrelax().arg("check").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}
