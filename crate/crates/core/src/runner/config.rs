use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::models::{DickeParams, ModelSpec, SpinChainParams};
use crate::stats::{TimeWindow, UnfoldOptions};

/// Largest polynomial degree accepted for unfolding.
const MAX_POLY_DEGREE: usize = 16;

/// Which dataset a run produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepKind {
    Fig1,
    Fig23,
    Fig4,
    Spacing,
    Check,
}

impl SweepKind {
    pub const ALL: [SweepKind; 5] = [
        SweepKind::Fig1,
        SweepKind::Fig23,
        SweepKind::Fig4,
        SweepKind::Spacing,
        SweepKind::Check,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Fig1 => "fig1",
            SweepKind::Fig23 => "fig23",
            SweepKind::Fig4 => "fig4",
            SweepKind::Spacing => "spacing",
            SweepKind::Check => "check",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn unit() -> f64 {
    1.0
}

/// Fixed model parameters; the coupling λ comes from the sweep lists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Dicke {
        j: f64,
        n_max: u32,
        #[serde(default = "unit")]
        omega: f64,
        #[serde(default = "unit")]
        omega0: f64,
    },
    SpinChain {
        sites: usize,
        n_up: usize,
        mu: f64,
        #[serde(default = "unit")]
        coupling: f64,
    },
}

impl ModelConfig {
    /// The model at coupling `lambda`. Call [`ModelConfig::problems`] first;
    /// an invalid `j` is mapped to 0 and caught by validation downstream.
    pub fn at(&self, lambda: f64) -> ModelSpec {
        match *self {
            ModelConfig::Dicke {
                j,
                n_max,
                omega,
                omega0,
            } => {
                let two_j = 2.0 * j;
                let two_j = if two_j.is_finite() && two_j >= 1.0 && two_j.fract() == 0.0 {
                    two_j as u32
                } else {
                    0
                };
                ModelSpec::Dicke(DickeParams {
                    two_j,
                    omega,
                    omega0,
                    lambda,
                    n_max,
                })
            }
            ModelConfig::SpinChain {
                sites,
                n_up,
                mu,
                coupling,
            } => ModelSpec::SpinChain(SpinChainParams {
                sites,
                n_up,
                mu,
                lambda,
                coupling,
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        self.at(0.0).name()
    }

    pub fn is_dicke(&self) -> bool {
        matches!(self, ModelConfig::Dicke { .. })
    }

    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let ModelConfig::Dicke { j, .. } = self {
            let two_j = 2.0 * j;
            if !(two_j.is_finite() && two_j >= 1.0 && two_j.fract() == 0.0) {
                out.push(format!("model.j must be a positive half-integer, got {j}"));
            }
        }
        if let Err(e) = self.at(0.0).validate() {
            out.push(format!("model: {}", strip_prefix(&e)));
        }
        out
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::InvalidParameter(m) => m.clone(),
        other => other.to_string(),
    }
}

/// `per_decade` points per factor of ten from `start` to `stop`, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGrid {
    pub start: f64,
    pub stop: f64,
    pub per_decade: u32,
}

impl LogGrid {
    pub fn points(&self) -> Vec<f64> {
        let (a, b) = (self.start.log10(), self.stop.log10());
        let steps = ((b - a) * f64::from(self.per_decade)).round() as i64;
        (0..=steps.max(0))
            .map(|k| 10f64.powf(a + k as f64 / f64::from(self.per_decade)))
            .collect()
    }

    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.start.is_finite() && self.start > 0.0) {
            out.push(format!("sweep.delta_lambda_grid.start must be > 0, got {}", self.start));
        }
        if !(self.stop.is_finite() && self.stop >= self.start) {
            out.push(format!(
                "sweep.delta_lambda_grid.stop must be >= start, got {}",
                self.stop
            ));
        }
        if self.per_decade == 0 {
            out.push("sweep.delta_lambda_grid.per_decade must be >= 1".into());
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Initial couplings.
    pub lambda0: Vec<f64>,
    /// Explicit quench amplitudes; merged with `delta_lambda_grid`.
    pub delta_lambda: Vec<f64>,
    pub delta_lambda_grid: Option<LogGrid>,
    /// 1-based initial eigenstates.
    pub n0: Vec<usize>,
    /// Couplings for the level-spacing diagnostics.
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for the synthetic ensembles of the `check` suite.
    pub seed: u64,
    /// Worker threads; 0 lets the runtime decide.
    pub workers: usize,
    /// Levels compared by the truncation check (default: largest `n0`).
    pub truncation_states: Option<usize>,
}

/// A complete experiment description, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub window: TimeWindow,
    #[serde(default)]
    pub unfolding: UnfoldOptions,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(vec![e.message().to_string()]))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Switches a Dicke config to the large sector (j = 20, n_max = 250).
    pub fn paper_scale(&mut self) {
        if let ModelConfig::Dicke { j, n_max, .. } = &mut self.model {
            *j = 20.0;
            *n_max = 250;
        }
    }

    /// Quench amplitudes: the explicit list merged with the log grid,
    /// ascending and without duplicates.
    pub fn delta_lambdas(&self) -> Vec<f64> {
        let mut all = self.sweep.delta_lambda.clone();
        if let Some(g) = &self.sweep.delta_lambda_grid {
            all.extend(g.points());
        }
        sorted_unique(all)
    }

    pub fn lambda0s(&self) -> Vec<f64> {
        sorted_unique(self.sweep.lambda0.clone())
    }

    pub fn n0s(&self) -> Vec<usize> {
        let mut v = self.sweep.n0.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn spacing_lambdas(&self) -> Vec<f64> {
        sorted_unique(self.sweep.lambda.clone())
    }

    /// Hash of everything that determines the numbers in the output.
    ///
    /// Worker count and output directory are excluded so that the CSVs stay
    /// byte-identical across machines and thread counts.
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.run.workers = 0;
        canonical.output = OutputConfig::default();
        let digest = Sha256::digest(canonical.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Every problem with the config for `kind`, reported together.
    pub fn validate(&self, kind: SweepKind) -> Result<()> {
        let mut p = self.model.problems();
        let model_ok = p.is_empty();
        let quench = matches!(kind, SweepKind::Fig1 | SweepKind::Fig23 | SweepKind::Fig4);

        check_couplings("sweep.lambda0", &self.sweep.lambda0, &mut p);
        check_couplings("sweep.delta_lambda", &self.sweep.delta_lambda, &mut p);
        check_couplings("sweep.lambda", &self.sweep.lambda, &mut p);
        if let Some(g) = &self.sweep.delta_lambda_grid {
            p.extend(g.problems());
        }
        if quench {
            if self.sweep.lambda0.is_empty() {
                p.push("sweep.lambda0 must not be empty".into());
            }
            if self.sweep.delta_lambda.is_empty() && self.sweep.delta_lambda_grid.is_none() {
                p.push("sweep.delta_lambda (or sweep.delta_lambda_grid) must not be empty".into());
            }
            if self.sweep.n0.is_empty() {
                p.push("sweep.n0 must not be empty".into());
            }
        }
        if kind == SweepKind::Spacing && self.sweep.lambda.is_empty() {
            p.push("sweep.lambda must not be empty".into());
        }
        if kind == SweepKind::Check {
            if self.sweep.lambda0.is_empty() && self.sweep.lambda.is_empty() {
                p.push("check needs sweep.lambda0 or sweep.lambda".into());
            }
            if self.model.is_dicke() && self.sweep.n0.is_empty() && self.run.truncation_states.is_none()
            {
                p.push("check on a dicke model needs sweep.n0 or run.truncation_states".into());
            }
        }
        if self.sweep.n0.contains(&0) {
            p.push("sweep.n0 entries are 1-based and must be >= 1".into());
        }
        if model_ok {
            let dim = self.model.at(0.0).sector_dim();
            if let Some(&worst) = self.sweep.n0.iter().max() {
                if worst > dim {
                    p.push(format!("sweep.n0 entry {worst} exceeds the sector dimension {dim}"));
                }
            }
            if let Some(k) = self.run.truncation_states {
                if k == 0 || k > dim {
                    p.push(format!("run.truncation_states must be in 1..={dim}, got {k}"));
                }
            }
        }
        if let Err(e) = self.window.validate() {
            p.push(format!("window: {}", strip_prefix(&e)));
        }
        if !(1..=MAX_POLY_DEGREE).contains(&self.unfolding.poly_degree) {
            p.push(format!(
                "unfolding.poly_degree must be in 1..={MAX_POLY_DEGREE}, got {}",
                self.unfolding.poly_degree
            ));
        }
        if !(0.0..0.5).contains(&self.unfolding.trim_fraction) {
            p.push(format!(
                "unfolding.trim_fraction must be in [0, 0.5), got {}",
                self.unfolding.trim_fraction
            ));
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p))
        }
    }
}

fn check_couplings(key: &str, values: &[f64], problems: &mut Vec<String>) {
    for &v in values {
        if !(v.is_finite() && v >= 0.0) {
            problems.push(format!("{key} entries must be finite and >= 0, got {v}"));
        }
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| a.to_bits() == b.to_bits());
    v
}
