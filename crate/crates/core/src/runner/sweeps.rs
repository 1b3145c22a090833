use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::Result;
use crate::linalg::{eigh, eigvalsh, project_onto_eigenbasis, SpectralDecomposition};
use crate::models::{converged_spectrum, ModelSpec};
use crate::par::{self, with_workers};
use crate::quench::{ipr_of_amplitudes, overlap_matrix, OverlapMatrix, QuenchSetup};
use crate::runner::cache::{DecompositionCache, Memo};
use crate::runner::config::{ExperimentConfig, SweepKind};
use crate::stats::{report_from_overlaps, spacing_stats, EquilibrationReport};

/// Rows of one sweep plus bookkeeping about how they were produced.
#[derive(Debug, Clone)]
pub struct SweepRun<R> {
    pub rows: Vec<R>,
    /// Distinct Hamiltonians diagonalized during the run.
    pub diagonalizations: usize,
    pub elapsed: Duration,
}

/// One point of the ξ(δλ) curves.
#[derive(Debug, Clone, PartialEq)]
pub struct IprRow {
    pub model: String,
    pub lambda0: f64,
    pub delta_lambda: f64,
    pub n0: usize,
    pub dim: usize,
    pub xi: f64,
}

/// Level-spacing diagnostics at one coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingRow {
    pub model: String,
    pub lambda: f64,
    pub dim: usize,
    /// Levels passed to the unfolding (for the Dicke model, the levels that
    /// are converged in the photon cutoff).
    pub levels_used: usize,
    /// Levels left after edge trimming.
    pub level_count: usize,
    pub brody_q: f64,
    pub ks_poisson: f64,
    pub ks_wigner: f64,
}

/// Equilibration rows for every `(λ0, n0)` at the configured δλ.
pub fn run_fig1_sweep(cfg: &ExperimentConfig) -> Result<SweepRun<EquilibrationReport>> {
    cfg.validate(SweepKind::Fig1)?;
    with_workers(cfg.run.workers, || equilibration_sweep(cfg))
}

/// `(ξ, gap, fluct)` over the full `λ0 × δλ × n0` grid.
pub fn run_fig2_fig3_sweep(cfg: &ExperimentConfig) -> Result<SweepRun<EquilibrationReport>> {
    cfg.validate(SweepKind::Fig23)?;
    with_workers(cfg.run.workers, || equilibration_sweep(cfg))
}

/// ξ versus δλ for each `(λ0, n0)`.
pub fn run_fig4_sweep(cfg: &ExperimentConfig) -> Result<SweepRun<IprRow>> {
    cfg.validate(SweepKind::Fig4)?;
    with_workers(cfg.run.workers, || ipr_sweep(cfg))
}

/// Brody and Kolmogorov–Smirnov diagnostics for each λ in `sweep.lambda`.
pub fn run_spacing_diag(cfg: &ExperimentConfig) -> Result<SweepRun<SpacingRow>> {
    cfg.validate(SweepKind::Spacing)?;
    with_workers(cfg.run.workers, || spacing_sweep(cfg))
}

type PairKey = (u64, u64);

fn equilibration_sweep(cfg: &ExperimentConfig) -> Result<SweepRun<EquilibrationReport>> {
    let start = Instant::now();
    let n0s = cfg.n0s();
    let mut pairs = Vec::new();
    for &l0 in &cfg.lambda0s() {
        for &d in &cfg.delta_lambdas() {
            pairs.push((l0, d));
        }
    }
    let units: Vec<(f64, f64, usize)> = pairs
        .iter()
        .flat_map(|&(l0, d)| n0s.iter().map(move |&n0| (l0, d, n0)))
        .collect();

    let cache = DecompositionCache::new(cfg.model);
    let overlaps: Memo<PairKey, OverlapMatrix> = Memo::new();
    for &(l0, d) in &pairs {
        cache.plan(l0);
        cache.plan(l0 + d);
    }
    for &(l0, d, _) in &units {
        overlaps.plan((l0.to_bits(), d.to_bits()));
    }

    let results = par::map(&units, |&(l0, d, n0)| {
        let key = (l0.to_bits(), d.to_bits());
        let o = overlaps.get_or_compute(key, || {
            let a = cache.get(l0)?;
            let b = cache.get(l0 + d)?;
            let o = overlap_matrix(&a, &b);
            cache.release(l0);
            cache.release(l0 + d);
            o
        })?;
        let setup = QuenchSetup::new(cfg.model.at(l0), d, n0)?;
        let row = report_from_overlaps(&setup, &o, &cfg.window);
        drop(o);
        overlaps.release(key);
        row
    });
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.lambda0
            .total_cmp(&b.lambda0)
            .then(a.delta_lambda.total_cmp(&b.delta_lambda))
            .then(a.n0.cmp(&b.n0))
    });
    Ok(SweepRun {
        rows,
        diagonalizations: cache.diagonalizations(),
        elapsed: start.elapsed(),
    })
}

fn ipr_sweep(cfg: &ExperimentConfig) -> Result<SweepRun<IprRow>> {
    let start = Instant::now();
    let lambda0s = cfg.lambda0s();
    let deltas = cfg.delta_lambdas();
    let n0s = cfg.n0s();
    let name = cfg.model.name().to_string();
    let dim = cfg.model.at(0.0).sector_dim();

    // Full decompositions at every λ0: they supply the initial states.
    let bases: Vec<Result<SpectralDecomposition>> =
        par::map(&lambda0s, |&l0| eigh(&cfg.model.at(l0).build()?.matrix));
    let bases: Vec<Arc<SpectralDecomposition>> = bases
        .into_iter()
        .map(|d| d.map(Arc::new))
        .collect::<Result<_>>()?;
    let base_index: BTreeMap<u64, usize> = lambda0s
        .iter()
        .enumerate()
        .map(|(i, l)| (l.to_bits(), i))
        .collect();

    // Perturbed couplings that are not themselves a λ0 need only eigenvalues
    // and the projections of the initial states that reach them.
    let mut targets: BTreeMap<u64, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, &l0) in lambda0s.iter().enumerate() {
        for &d in deltas.iter().filter(|&&d| d > 0.0) {
            let l = l0 + d;
            if !base_index.contains_key(&l.to_bits()) {
                let sources = targets.entry(l.to_bits()).or_default();
                sources.extend(n0s.iter().map(|&n0| (i, n0)));
            }
        }
    }
    let target_list: Vec<(u64, Vec<(usize, usize)>)> = targets.into_iter().collect();
    let projected = par::map(&target_list, |(bits, sources)| -> Result<Vec<f64>> {
        let h = cfg.model.at(f64::from_bits(*bits)).build()?;
        let vectors: Vec<&[f64]> = sources
            .iter()
            .map(|&(i, n0)| bases[i].eigenvector(n0 - 1))
            .collect();
        let p = project_onto_eigenbasis(&h.matrix, &vectors)?;
        Ok(p.amplitudes.iter().map(|a| ipr_of_amplitudes(a)).collect())
    });
    let mut xi_at: BTreeMap<(u64, usize, usize), f64> = BTreeMap::new();
    for ((bits, sources), xis) in target_list.iter().zip(projected) {
        for (&(i, n0), xi) in sources.iter().zip(xis?) {
            xi_at.insert((*bits, i, n0), xi);
        }
    }

    let mut rows = Vec::new();
    for (i, &l0) in lambda0s.iter().enumerate() {
        for &d in &deltas {
            let l = l0 + d;
            for &n0 in &n0s {
                let xi = if d == 0.0 {
                    // Same Hamiltonian on both sides: the overlap is the identity.
                    1.0
                } else if let Some(&j) = base_index.get(&l.to_bits()) {
                    let v = bases[i].eigenvector(n0 - 1);
                    let amps: Vec<f64> = (0..dim)
                        .map(|m| bases[j].eigenvector(m).iter().zip(v).map(|(a, b)| a * b).sum())
                        .collect();
                    ipr_of_amplitudes(&amps)
                } else {
                    xi_at[&(l.to_bits(), i, n0)]
                };
                rows.push(IprRow {
                    model: name.clone(),
                    lambda0: l0,
                    delta_lambda: d,
                    n0,
                    dim,
                    xi,
                });
            }
        }
    }
    let distinct: HashSet<u64> = lambda0s.iter().map(|l| l.to_bits()).collect();
    Ok(SweepRun {
        rows,
        diagonalizations: distinct.len() + target_list.len(),
        elapsed: start.elapsed(),
    })
}

fn spacing_sweep(cfg: &ExperimentConfig) -> Result<SweepRun<SpacingRow>> {
    let start = Instant::now();
    let lambdas = cfg.spacing_lambdas();
    let results = par::map(&lambdas, |&lambda| -> Result<SpacingRow> {
        let spec = cfg.model.at(lambda);
        let spectrum = match spec {
            ModelSpec::Dicke(p) => converged_spectrum(&p)?,
            ModelSpec::SpinChain(_) => eigvalsh(&spec.build()?.matrix)?,
        };
        let stats = spacing_stats(&spectrum, &cfg.unfolding)?;
        Ok(SpacingRow {
            model: spec.name().to_string(),
            lambda,
            dim: spec.sector_dim(),
            levels_used: spectrum.len(),
            level_count: stats.level_count(),
            brody_q: stats.brody_q,
            ks_poisson: stats.ks_poisson,
            ks_wigner: stats.ks_wigner,
        })
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    let per_lambda = if cfg.model.is_dicke() { 2 } else { 1 };
    Ok(SweepRun {
        diagonalizations: per_lambda * rows.len(),
        rows,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_dicke() -> ExperimentConfig {
        ExperimentConfig::from_toml_str(
            r#"
            [model]
            kind = "dicke"
            j = 2
            n_max = 12

            [sweep]
            lambda0 = [0.3, 0.5, 0.2]
            delta_lambda = [0.0, 0.1]
            n0 = [3, 7]

            [window]
            tau0 = 100.0
            span = 20.0
            n_steps = 50
            "#,
        )
        .unwrap()
    }

    #[test]
    fn each_coupling_is_diagonalized_once() {
        // 0.2 + 0.1 ≠ 0.3 in binary, so the couplings are
        // {0.2, 0.3, 0.5, 0.30000000000000004, 0.4, 0.6}.
        let run = run_fig2_fig3_sweep(&small_dicke()).unwrap();
        assert_eq!(run.rows.len(), 12);
        assert_eq!(run.diagonalizations, 6);
        let keys: Vec<(f64, f64, usize)> = run
            .rows
            .iter()
            .map(|r| (r.lambda0, r.delta_lambda, r.n0))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
        assert_eq!(keys, sorted);
    }

    #[test]
    fn zero_quench_rows_are_trivial() {
        let run = run_fig1_sweep(&small_dicke()).unwrap();
        for r in run.rows.iter().filter(|r| r.delta_lambda == 0.0) {
            assert_eq!((r.xi, r.gap, r.fluct), (1.0, 0.0, 0.0));
        }
    }

    #[test]
    fn fig4_projection_path_matches_full_overlaps() {
        let cfg = small_dicke();
        let ipr = run_fig4_sweep(&cfg).unwrap();
        let full = run_fig2_fig3_sweep(&cfg).unwrap();
        assert_eq!(ipr.rows.len(), full.rows.len());
        for (a, b) in ipr.rows.iter().zip(&full.rows) {
            assert_eq!((a.lambda0, a.delta_lambda, a.n0), (b.lambda0, b.delta_lambda, b.n0));
            assert!((a.xi - b.xi).abs() < 1e-9 * b.xi, "{a:?} vs {}", b.xi);
        }
    }

    #[test]
    fn validation_runs_before_any_compute() {
        let mut cfg = small_dicke();
        cfg.sweep.n0.push(10_000);
        assert!(matches!(
            run_fig2_fig3_sweep(&cfg),
            Err(crate::Error::Config(_))
        ));
    }
}
