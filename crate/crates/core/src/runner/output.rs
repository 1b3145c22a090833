use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::runner::config::ExperimentConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Columns of the universal-curve dataset, in order.
pub const FIG23_COLUMNS: [&str; 12] = [
    "model",
    "lambda0",
    "delta_lambda",
    "n0",
    "dim",
    "xi",
    "s_dec",
    "s_mean",
    "s_var",
    "gap",
    "fluct",
    "f_xi",
];

/// Round-trippable float: 17 significant digits, `.` decimal separator.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A header plus string cells, written as UTF-8 CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()?)?;
        Ok(())
    }
}

/// Plain-text run record written next to each CSV.
pub struct Sidecar<'a> {
    pub kind: &'a str,
    pub cfg: &'a ExperimentConfig,
    pub csv_name: &'a str,
    pub rows: usize,
    pub diagonalizations: usize,
    pub elapsed: Duration,
    pub started: SystemTime,
    pub extra: Vec<(String, String)>,
}

impl Sidecar<'_> {
    pub fn render(&self) -> String {
        let spec = self.cfg.model.at(0.0);
        let started = self
            .started
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k}: {v}\n"));
        line("library", format!("qrelax {VERSION}"));
        line("sweep", self.kind.to_string());
        line("csv", self.csv_name.to_string());
        line("model", spec.describe());
        line("sector_dim", spec.sector_dim().to_string());
        line("config_hash", self.cfg.config_hash());
        line("rows", self.rows.to_string());
        line("diagonalizations", self.diagonalizations.to_string());
        line("workers", self.cfg.run.workers.to_string());
        line("started_unix_s", started.to_string());
        line("wall_clock_s", format!("{:.3}", self.elapsed.as_secs_f64()));
        for (k, v) in &self.extra {
            line(k, v.clone());
        }
        out.push_str("\n# config\n");
        out.push_str(&self.cfg.to_toml());
        out
    }
}

/// `<dir>/<kind>.csv` and `<dir>/<kind>.meta.txt`.
pub fn output_paths(dir: &Path, kind: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{kind}.csv")), dir.join(format!("{kind}.meta.txt")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.0, 1.0, -2.5e-300, 0.42278433509846713, 1e7 + 1.0 / 3.0] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["x".into(), fmt_float(1.0)]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "a,b\nx,1.0000000000000000e0\n");
    }
}
