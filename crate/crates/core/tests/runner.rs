use std::fs;

use qrelax::runner::{
    execute, run_fig2_fig3_sweep, ExperimentConfig, SweepKind, FIG23_COLUMNS,
};
use qrelax::Error;

fn config(dir: &std::path::Path, workers: usize) -> ExperimentConfig {
    let text = format!(
        r#"
[model]
kind = "dicke"
j = 2
n_max = 40

[sweep]
lambda0 = [0.2, 0.5, 0.9]
delta_lambda = [0.0, 0.05, 0.3]
n0 = [1, 4, 12, 30]
lambda = [0.3, 0.9]

[window]
tau0 = 1e5
span = 60.0
n_steps = 300

[output]
dir = "{}"

[run]
workers = {workers}
seed = 3
truncation_states = 5
"#,
        dir.display()
    );
    ExperimentConfig::from_toml_str(&text).unwrap()
}

#[test]
fn csvs_are_byte_identical_across_worker_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for kind in [SweepKind::Fig1, SweepKind::Fig23, SweepKind::Fig4, SweepKind::Check] {
        execute(kind, &config(a.path(), 1)).unwrap();
        execute(kind, &config(b.path(), 3)).unwrap();
        let name = format!("{kind}.csv");
        let (x, y) = (
            fs::read(a.path().join(&name)).unwrap(),
            fs::read(b.path().join(&name)).unwrap(),
        );
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), 2);
    execute(SweepKind::Fig23, &cfg).unwrap();
    let first = fs::read(dir.path().join("fig23.csv")).unwrap();
    execute(SweepKind::Fig23, &cfg).unwrap();
    assert_eq!(first, fs::read(dir.path().join("fig23.csv")).unwrap());
}

#[test]
fn every_coupling_is_diagonalized_exactly_once() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), 2);
    let run = run_fig2_fig3_sweep(&cfg).unwrap();
    assert_eq!(run.rows.len(), 3 * 3 * 4);
    // λ0 ∪ {λ0 + δλ}: 0.2, 0.5, 0.9, 0.25, 0.55, 0.95, 0.8, 1.2 (0.5 is shared).
    let mut couplings: Vec<u64> = Vec::new();
    for l0 in [0.2f64, 0.5, 0.9] {
        for d in [0.0, 0.05, 0.3] {
            couplings.push((l0 + d).to_bits());
        }
    }
    couplings.sort_unstable();
    couplings.dedup();
    assert_eq!(run.diagonalizations, couplings.len());
}

#[test]
fn fig23_csv_has_the_documented_header() {
    let dir = tempfile::tempdir().unwrap();
    let summary = execute(SweepKind::Fig23, &config(dir.path(), 1)).unwrap();
    let text = fs::read_to_string(&summary.csv).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, FIG23_COLUMNS.join(","));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), FIG23_COLUMNS.len());
    let meta = fs::read_to_string(&summary.sidecar).unwrap();
    for key in ["library:", "config_hash:", "wall_clock_s:", "# config"] {
        assert!(meta.contains(key), "sidecar lacks {key}");
    }
}

#[test]
fn provenance_columns_carry_hash_and_params() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), 1);
    let summary = execute(SweepKind::Fig4, &cfg).unwrap();
    let mut rdr = csv::Reader::from_path(&summary.csv).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let hash_col = headers.iter().position(|h| h == "config_hash").unwrap();
    let params_col = headers.iter().position(|h| h == "params").unwrap();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        assert_eq!(&rec[hash_col], cfg.config_hash());
        assert!(rec[params_col].starts_with("dicke[j=2;n_max=40"));
    }
}

#[test]
fn check_run_passes_on_a_converged_model() {
    let dir = tempfile::tempdir().unwrap();
    let summary = execute(SweepKind::Check, &config(dir.path(), 1)).unwrap();
    assert_eq!(summary.check_passed, Some(true));
}

#[test]
fn invalid_config_fails_before_writing_anything() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(&dir.path().join("never"), 1);
    cfg.sweep.n0 = vec![0, 10_000];
    cfg.window.n_steps = 0;
    match execute(SweepKind::Fig23, &cfg) {
        Err(Error::Config(problems)) => assert!(problems.len() >= 2, "{problems:?}"),
        other => panic!("expected a config error, got {other:?}"),
    }
    assert!(!dir.path().join("never").exists());
}
