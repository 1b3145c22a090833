//! Sweep engine: experiment configs, a shared decomposition cache, the
//! figure datasets as CSV, and a plain-text metadata sidecar per run.

mod cache;
mod check;
mod config;
mod output;
mod sweeps;

use std::fs;
use std::path::PathBuf;
use std::time::{Duration, SystemTime};

pub use cache::DecompositionCache;
pub use check::{
    invariant_suite, referenced_couplings, run_check, truncation_states, CheckRow,
    InvariantOutcome, TruncationRow,
};
pub use config::{
    ExperimentConfig, LogGrid, ModelConfig, OutputConfig, RunConfig, SweepConfig, SweepKind,
};
pub use output::{fmt_float, output_paths, Sidecar, Table, FIG23_COLUMNS, VERSION};
pub use sweeps::{
    run_fig1_sweep, run_fig2_fig3_sweep, run_fig4_sweep, run_spacing_diag, IprRow, SpacingRow,
    SweepRun,
};

use crate::error::Result;
use crate::models::TRUNCATION_TOLERANCE;
use crate::stats::EquilibrationReport;

fn provenance(cfg: &ExperimentConfig) -> [String; 2] {
    [VERSION.to_string(), cfg.config_hash()]
}

/// Per-(λ0, n0) equilibration rows with ΔS_D and full provenance.
pub fn fig1_table(cfg: &ExperimentConfig, rows: &[EquilibrationReport]) -> Table {
    let params = cfg.model.at(0.0).describe();
    let mut t = Table::new([
        "model",
        "params",
        "dim",
        "lambda0",
        "delta_lambda",
        "n0",
        "xi",
        "s_dec",
        "s_mean",
        "s_std",
        "gap",
        "fluct",
        "version",
        "config_hash",
    ]);
    for r in rows {
        let mut row = vec![
            r.model.clone(),
            params.clone(),
            r.dim.to_string(),
            fmt_float(r.lambda0),
            fmt_float(r.delta_lambda),
            r.n0.to_string(),
            fmt_float(r.xi),
            fmt_float(r.s_dec),
            fmt_float(r.s_mean),
            fmt_float(r.s_var.sqrt()),
            fmt_float(r.gap),
            fmt_float(r.fluct),
        ];
        row.extend(provenance(cfg));
        t.push(row);
    }
    t
}

/// The universal-curve dataset with exactly [`FIG23_COLUMNS`].
pub fn fig23_table(rows: &[EquilibrationReport]) -> Table {
    let mut t = Table::new(FIG23_COLUMNS);
    for r in rows {
        t.push(vec![
            r.model.clone(),
            fmt_float(r.lambda0),
            fmt_float(r.delta_lambda),
            r.n0.to_string(),
            r.dim.to_string(),
            fmt_float(r.xi),
            fmt_float(r.s_dec),
            fmt_float(r.s_mean),
            fmt_float(r.s_var),
            fmt_float(r.gap),
            fmt_float(r.fluct),
            fmt_float(r.f_xi()),
        ]);
    }
    t
}

pub fn fig4_table(cfg: &ExperimentConfig, rows: &[IprRow]) -> Table {
    let params = cfg.model.at(0.0).describe();
    let mut t = Table::new([
        "model",
        "params",
        "dim",
        "lambda0",
        "delta_lambda",
        "n0",
        "xi",
        "version",
        "config_hash",
    ]);
    for r in rows {
        let mut row = vec![
            r.model.clone(),
            params.clone(),
            r.dim.to_string(),
            fmt_float(r.lambda0),
            fmt_float(r.delta_lambda),
            r.n0.to_string(),
            fmt_float(r.xi),
        ];
        row.extend(provenance(cfg));
        t.push(row);
    }
    t
}

pub fn spacing_table(cfg: &ExperimentConfig, rows: &[SpacingRow]) -> Table {
    let params = cfg.model.at(0.0).describe();
    let mut t = Table::new([
        "model",
        "params",
        "dim",
        "lambda",
        "levels_used",
        "level_count",
        "brody_q",
        "ks_poisson",
        "ks_wigner",
        "version",
        "config_hash",
    ]);
    for r in rows {
        let mut row = vec![
            r.model.clone(),
            params.clone(),
            r.dim.to_string(),
            fmt_float(r.lambda),
            r.levels_used.to_string(),
            r.level_count.to_string(),
            fmt_float(r.brody_q),
            fmt_float(r.ks_poisson),
            fmt_float(r.ks_wigner),
        ];
        row.extend(provenance(cfg));
        t.push(row);
    }
    t
}

pub fn check_table(cfg: &ExperimentConfig, rows: &[CheckRow]) -> Table {
    let params = cfg.model.at(0.0).describe();
    let mut t = Table::new([
        "item",
        "params",
        "lambda",
        "k_states",
        "n_max_extended",
        "max_deviation",
        "tolerance",
        "passed",
        "detail",
        "version",
        "config_hash",
    ]);
    for r in rows {
        let mut row = match r {
            CheckRow::Truncation(tr) => {
                let rep = &tr.report;
                vec![
                    "truncation".to_string(),
                    params.clone(),
                    fmt_float(tr.lambda),
                    rep.k_states.to_string(),
                    rep.n_max_extended.to_string(),
                    fmt_float(rep.max_deviation),
                    fmt_float(TRUNCATION_TOLERANCE * rep.energy_range),
                    rep.converged.to_string(),
                    String::new(),
                ]
            }
            CheckRow::Invariant(o) => vec![
                o.name.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                o.passed.to_string(),
                o.detail.clone(),
            ],
        };
        row.extend(provenance(cfg));
        t.push(row);
    }
    t
}

/// What a finished run wrote.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub kind: SweepKind,
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub rows: usize,
    pub diagonalizations: usize,
    pub elapsed: Duration,
    /// `Some(false)` when a `check` run found a failing item.
    pub check_passed: Option<bool>,
}

/// Runs `kind` on `cfg` and writes `<output.dir>/<kind>.csv` plus its sidecar.
pub fn execute(kind: SweepKind, cfg: &ExperimentConfig) -> Result<RunSummary> {
    let started = SystemTime::now();
    let (table, rows, diagonalizations, elapsed, check_passed) = match kind {
        SweepKind::Fig1 => {
            let run = run_fig1_sweep(cfg)?;
            (fig1_table(cfg, &run.rows), run.rows.len(), run.diagonalizations, run.elapsed, None)
        }
        SweepKind::Fig23 => {
            let run = run_fig2_fig3_sweep(cfg)?;
            (fig23_table(&run.rows), run.rows.len(), run.diagonalizations, run.elapsed, None)
        }
        SweepKind::Fig4 => {
            let run = run_fig4_sweep(cfg)?;
            (fig4_table(cfg, &run.rows), run.rows.len(), run.diagonalizations, run.elapsed, None)
        }
        SweepKind::Spacing => {
            let run = run_spacing_diag(cfg)?;
            (spacing_table(cfg, &run.rows), run.rows.len(), run.diagonalizations, run.elapsed, None)
        }
        SweepKind::Check => {
            let run = run_check(cfg)?;
            let ok = run.rows.iter().all(CheckRow::passed);
            (check_table(cfg, &run.rows), run.rows.len(), run.diagonalizations, run.elapsed, Some(ok))
        }
    };
    fs::create_dir_all(&cfg.output.dir)?;
    let (csv, sidecar) = output_paths(&cfg.output.dir, kind.name());
    table.write(&csv)?;
    let csv_name = csv
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut extra = Vec::new();
    if let Some(ok) = check_passed {
        extra.push(("check_passed".to_string(), ok.to_string()));
    }
    let meta = Sidecar {
        kind: kind.name(),
        cfg,
        csv_name: &csv_name,
        rows,
        diagonalizations,
        elapsed,
        started,
        extra,
    };
    fs::write(&sidecar, meta.render())?;
    Ok(RunSummary {
        kind,
        csv,
        sidecar,
        rows,
        diagonalizations,
        elapsed,
        check_passed,
    })
}
