//! `check`: truncation convergence for every coupling a config touches, plus
//! a seeded suite of self-consistency checks on small systems.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::Result;
use crate::linalg::{eigh, eigvalsh, jacobi_eigh, SymmetricMatrix};
use crate::models::{
    build_dicke, build_spin_chain, truncation_check, DickeBasis, DickeParams, ModelSpec,
    SpinChainParams, TruncationReport,
};
use crate::par::{self, with_workers};
use crate::quench::{
    diagonal_ensemble, diagonal_entropy, entropy_trace, ipr, overlap_matrix, survival_distribution,
};
use crate::runner::config::{ExperimentConfig, SweepKind};
use crate::runner::sweeps::SweepRun;
use crate::stats::{
    brody_fit, universal_curve, unfold_spectrum, window_stats, TimeWindow, UnfoldOptions,
    UNIVERSAL_GAP,
};

/// Truncation outcome at one coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationRow {
    pub lambda: f64,
    pub report: TruncationReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckRow {
    Truncation(TruncationRow),
    Invariant(InvariantOutcome),
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        match self {
            CheckRow::Truncation(t) => t.report.converged,
            CheckRow::Invariant(i) => i.passed,
        }
    }
}

/// Every coupling a config refers to: λ0, λ0 + δλ and the spacing couplings.
pub fn referenced_couplings(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut all = cfg.lambda0s();
    for &l0 in &cfg.lambda0s() {
        for &d in &cfg.delta_lambdas() {
            all.push(l0 + d);
        }
    }
    all.extend(cfg.spacing_lambdas());
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| a.to_bits() == b.to_bits());
    all
}

/// Levels compared by the truncation check: `run.truncation_states`, or the
/// largest initial state.
pub fn truncation_states(cfg: &ExperimentConfig) -> Option<usize> {
    cfg.run
        .truncation_states
        .or_else(|| cfg.sweep.n0.iter().copied().max())
}

pub fn run_check(cfg: &ExperimentConfig) -> Result<SweepRun<CheckRow>> {
    cfg.validate(SweepKind::Check)?;
    with_workers(cfg.run.workers, || {
        let start = Instant::now();
        let mut rows = Vec::new();
        let mut diagonalizations = 0;
        if let (true, Some(k)) = (cfg.model.is_dicke(), truncation_states(cfg)) {
            let lambdas = referenced_couplings(cfg);
            let reports = par::map(&lambdas, |&lambda| match cfg.model.at(lambda) {
                ModelSpec::Dicke(p) => truncation_check(&p, k),
                ModelSpec::SpinChain(_) => unreachable!("dicke checked above"),
            });
            for (lambda, report) in lambdas.into_iter().zip(reports) {
                rows.push(CheckRow::Truncation(TruncationRow {
                    lambda,
                    report: report?,
                }));
                diagonalizations += 2;
            }
        }
        rows.extend(invariant_suite(cfg.run.seed).into_iter().map(CheckRow::Invariant));
        Ok(SweepRun {
            rows,
            diagonalizations,
            elapsed: start.elapsed(),
        })
    })
}

fn outcome(name: &'static str, passed: bool, detail: String) -> InvariantOutcome {
    InvariantOutcome {
        name,
        passed,
        detail,
    }
}

fn failed(name: &'static str, e: crate::Error) -> InvariantOutcome {
    outcome(name, false, format!("error: {e}"))
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> SymmetricMatrix {
    let vals: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SymmetricMatrix::from_lower_fn(n, |i, j| vals[i * n + j]).expect("finite")
}

/// Small, seeded checks of the properties every sweep relies on.
pub fn invariant_suite(seed: u64) -> Vec<InvariantOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let h = random_symmetric(&mut rng, 50);
    out.push(match eigh(&h) {
        Ok(d) => {
            let orth = d.orthogonality_error();
            let res = d.max_residual(&h);
            let bound = 1e-9 * h.max_abs() * 50.0;
            outcome(
                "eigh_accuracy_contract",
                orth <= 1e-10 && res <= bound,
                format!("orthogonality {orth:.2e}, residual {res:.2e} (bound {bound:.2e})"),
            )
        }
        Err(e) => failed("eigh_accuracy_contract", e),
    });

    let h = random_symmetric(&mut rng, 24);
    out.push(match (eigh(&h), jacobi_eigh(&h)) {
        (Ok(a), Ok(b)) => {
            let dev = a
                .eigenvalues()
                .iter()
                .zip(b.eigenvalues())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            outcome("eigh_matches_jacobi", dev <= 1e-10, format!("max deviation {dev:.2e}"))
        }
        (Err(e), _) | (_, Err(e)) => failed("eigh_matches_jacobi", e),
    });

    out.push(diagonal_ensemble_vs_time_average(&mut rng));
    out.push(small_quench_bounds(&mut rng));

    let mut prev = 0.0;
    let mut monotone = true;
    for k in 1..=4000 {
        let xi = 1.0 + 1e-3 * (k as f64).powi(2);
        let f = universal_curve(xi).unwrap_or(f64::NAN);
        monotone &= f > prev && f < UNIVERSAL_GAP;
        prev = f;
    }
    out.push(outcome(
        "universal_curve_monotone_bounded",
        monotone,
        "4000-point grid on [1, 1.6e4]".into(),
    ));

    let trace: Vec<f64> = (0..1000).map(|_| rng.gen_range(0.0..3.0)).collect();
    let shifted: Vec<f64> = trace.iter().map(|x| x + 1234.5).collect();
    out.push(match (window_stats(&trace), window_stats(&shifted)) {
        (Ok((_, a)), Ok((_, b))) => outcome(
            "variance_translation_invariant",
            (a - b).abs() <= 1e-12,
            format!("|Δvar| = {:.2e}", (a - b).abs()),
        ),
        (Err(e), _) | (_, Err(e)) => failed("variance_translation_invariant", e),
    });

    let poisson = poisson_levels(&mut rng, 2000);
    let scaled: Vec<f64> = poisson.iter().map(|e| 3.7 * e).collect();
    let opts = UnfoldOptions::default();
    out.push(match (unfold_spectrum(&poisson, &opts), unfold_spectrum(&scaled, &opts)) {
        (Ok(a), Ok(b)) => {
            let dev = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            outcome("unfolding_scale_invariant", dev <= 1e-8, format!("max |Δs| = {dev:.2e}"))
        }
        (Err(e), _) | (_, Err(e)) => failed("unfolding_scale_invariant", e),
    });

    let s: Vec<f64> = (0..5000).map(|_| Exp1.sample(&mut rng)).collect();
    out.push(match brody_fit(&s) {
        Ok(q) => outcome("brody_poisson_sampler", q < 0.15, format!("q = {q:.4}")),
        Err(e) => failed("brody_poisson_sampler", e),
    });
    let s: Vec<f64> = (0..5000).map(|_| wigner_sample(&mut rng)).collect();
    out.push(match brody_fit(&s) {
        Ok(q) => outcome("brody_wigner_sampler", q > 0.85, format!("q = {q:.4}")),
        Err(e) => failed("brody_wigner_sampler", e),
    });

    out.push(spin_chain_vs_full_space());
    out.push(dicke_uncoupled_spectrum());
    out
}

/// Cumulative sums of unit-mean exponential gaps.
pub(crate) fn poisson_levels(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut e = 0.0;
    (0..n)
        .map(|_| {
            let gap: f64 = Exp1.sample(rng);
            e += gap;
            e
        })
        .collect()
}

/// Inverse-CDF draw from the Wigner surmise.
pub(crate) fn wigner_sample(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen_range(0.0..1.0);
    (-4.0 / std::f64::consts::PI * (1.0 - u).ln()).sqrt()
}

fn random_quench(rng: &mut ChaCha8Rng, n: usize) -> (SymmetricMatrix, SymmetricMatrix) {
    let a = random_symmetric(rng, n);
    let v = random_symmetric(rng, n);
    let b = SymmetricMatrix::from_lower_fn(n, |i, j| a.get(i, j) + 0.3 * v.get(i, j))
        .expect("finite");
    (a, b)
}

fn diagonal_ensemble_vs_time_average(rng: &mut ChaCha8Rng) -> InvariantOutcome {
    const NAME: &str = "diagonal_ensemble_matches_time_average";
    // Unrelated H and H' spread the state over the whole basis, which keeps
    // the Monte Carlo error of 10^4 samples well below the 2e-3 tolerance.
    // Strongly localized states need far more samples.
    let a = random_symmetric(rng, 40);
    let b = random_symmetric(rng, 40);
    let mut run = || -> Result<f64> {
        let o = overlap_matrix(&eigh(&a)?, &eigh(&b)?)?;
        let n0 = 17;
        let mu = diagonal_ensemble(&o, n0)?;
        let samples = 10_000;
        let mut avg = vec![0.0; o.dim()];
        for _ in 0..samples {
            let tau = rng.gen_range(0.0..1e5);
            let c = survival_distribution(&o, n0, tau)?;
            for (acc, p) in avg.iter_mut().zip(c.probabilities()) {
                *acc += p / samples as f64;
            }
        }
        Ok(mu
            .probabilities()
            .iter()
            .zip(&avg)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max))
    };
    match run() {
        Ok(dev) => outcome(NAME, dev <= 2e-3, format!("max component deviation {dev:.2e}")),
        Err(e) => failed(NAME, e),
    }
}

fn small_quench_bounds(rng: &mut ChaCha8Rng) -> InvariantOutcome {
    const NAME: &str = "quench_jensen_and_zero_quench";
    let (a, b) = random_quench(rng, 30);
    let run = || -> Result<(bool, String)> {
        let (da, db) = (eigh(&a)?, eigh(&b)?);
        let window = TimeWindow::new(0.0, 50.0, 200)?;
        let n0 = 7;
        let o = overlap_matrix(&da, &db)?;
        let s_dec = diagonal_entropy(&diagonal_ensemble(&o, n0)?);
        let gap = s_dec - entropy_trace(&o, n0, &window)?.mean();
        let same = overlap_matrix(&da, &da)?;
        let zero_gap = diagonal_entropy(&diagonal_ensemble(&same, n0)?)
            - entropy_trace(&same, n0, &window)?.mean();
        let zero_xi = ipr(&same, n0)?;
        let ok = gap >= -1e-9 && zero_gap == 0.0 && zero_xi == 1.0;
        Ok((
            ok,
            format!("gap {gap:.4} (must be >= -1e-9); zero quench gap {zero_gap}, xi {zero_xi}"),
        ))
    };
    match run() {
        Ok((ok, detail)) => outcome(NAME, ok, detail),
        Err(e) => failed(NAME, e),
    }
}

/// Full 2^L matrix from the bond definitions, projected on the sector.
fn spin_chain_vs_full_space() -> InvariantOutcome {
    const NAME: &str = "spin_chain_sector_matches_full_space";
    let run = || -> Result<f64> {
        let mut worst = 0.0f64;
        for (sites, n_up) in [(6, 3), (7, 2), (8, 4)] {
            let p = SpinChainParams::new(sites, n_up, 0.5, 0.7)?;
            let sector = eigvalsh(&build_spin_chain(&p)?.matrix)?;
            let full = full_space_projection(&p)?;
            worst = sector
                .iter()
                .zip(&full)
                .map(|(x, y)| (x - y).abs())
                .fold(worst, f64::max);
            if sector.len() != full.len() {
                worst = f64::INFINITY;
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(dev) => outcome(NAME, dev <= 1e-10, format!("max deviation {dev:.2e} for L = 6, 7, 8")),
        Err(e) => failed(NAME, e),
    }
}

fn full_space_projection(p: &SpinChainParams) -> Result<Vec<f64>> {
    let l = p.sites;
    let dim = 1usize << l;
    let mut h = vec![0.0; dim * dim];
    for s in 0..dim {
        for (reach, w) in [(1, 1.0), (2, p.lambda)] {
            for i in 0..l.saturating_sub(reach) {
                let k = i + reach;
                let (a, b) = ((s >> i) & 1, (s >> k) & 1);
                let zz = if a == b { 0.25 } else { -0.25 };
                h[s * dim + s] += w * p.coupling * p.mu * zz;
                if a != b {
                    let t = s ^ (1 << i) ^ (1 << k);
                    h[t * dim + s] += w * p.coupling * 0.5;
                }
            }
        }
    }
    let reflect = |s: usize| (0..l).fold(0, |acc, i| acc | (((s >> i) & 1) << (l - 1 - i)));
    // Orthonormal even-reflection vectors in the n_up block.
    let mut vecs: Vec<Vec<(usize, f64)>> = Vec::new();
    for s in 0..dim {
        if s.count_ones() as usize != p.n_up {
            continue;
        }
        let r = reflect(s);
        if s < r {
            let c = std::f64::consts::FRAC_1_SQRT_2;
            vecs.push(vec![(s, c), (r, c)]);
        } else if s == r {
            vecs.push(vec![(s, 1.0)]);
        }
    }
    let n = vecs.len();
    let h = &h;
    let mut proj = vec![0.0; n * n];
    for (a, va) in vecs.iter().enumerate() {
        for (b, vb) in vecs.iter().enumerate() {
            proj[a * n + b] = va
                .iter()
                .flat_map(|&(i, x)| vb.iter().map(move |&(j, y)| x * y * h[i * dim + j]))
                .sum();
        }
    }
    // Symmetrize away the round-off of the two triangles.
    let m = SymmetricMatrix::from_lower_fn(n, |i, j| 0.5 * (proj[i * n + j] + proj[j * n + i]))?;
    eigvalsh(&m)
}

fn dicke_uncoupled_spectrum() -> InvariantOutcome {
    const NAME: &str = "dicke_uncoupled_spectrum_exact";
    let run = || -> Result<bool> {
        let p = DickeParams::resonant(3.0, 0.0, 30)?;
        let got = eigvalsh(&build_dicke(&p)?.matrix)?;
        let mut want: Vec<f64> = DickeBasis::even(p.two_j, p.n_max)
            .states
            .iter()
            .map(|s| p.omega * f64::from(s.n) + p.omega0 * s.m(p.two_j))
            .collect();
        want.sort_by(f64::total_cmp);
        Ok(got == want)
    };
    match run() {
        Ok(ok) => outcome(NAME, ok, "j = 3, n_max = 30, bitwise multiset comparison".into()),
        Err(e) => failed(NAME, e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariant_suite_passes_for_several_seeds() {
        for seed in [0, 1, 2] {
            for o in invariant_suite(seed) {
                assert!(o.passed, "seed {seed}: {} failed: {}", o.name, o.detail);
            }
        }
    }

    #[test]
    fn referenced_couplings_are_unique() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            [model]
            kind = "dicke"
            j = 2
            n_max = 10
            [sweep]
            lambda0 = [0.1, 0.2]
            delta_lambda = [0.0, 0.1]
            lambda = [0.2, 0.9]
            n0 = [4]
            "#,
        )
        .unwrap();
        assert_eq!(referenced_couplings(&cfg), vec![0.1, 0.2, 0.30000000000000004, 0.9]);
        assert_eq!(truncation_states(&cfg), Some(4));
    }
}
