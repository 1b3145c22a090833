//! Cyclic quench λ0 → λ0 + δλ → λ0 starting from an eigenstate of H(λ0).
//!
//! Everything here works from the overlap matrix between the two eigenbases:
//! `O[m][n] = ⟨m(λ0+δλ)|n(λ0)⟩`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{gemm, DenseMatrix, MatRef, SpectralDecomposition};
use crate::models::ModelSpec;
use crate::par;
use crate::stats::window::{window_stats, TimeWindow};

/// Probabilities below this are treated as exactly zero inside the log.
const LOG_FLOOR: f64 = 1e-300;
const NEGATIVE_SLACK: f64 = 1e-14;
const NORMALIZATION_TOLERANCE: f64 = 1e-10;
/// Relative spectral-span threshold for merging perturbed levels.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;
/// Number of times evaluated per GEMM batch in [`entropy_trace`].
const TIME_BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchSetup {
    /// Model at the initial coupling λ0.
    pub model: ModelSpec,
    pub delta_lambda: f64,
    /// 1-based index of the initial eigenstate, ascending in energy.
    pub n0: usize,
}

impl QuenchSetup {
    pub fn new(model: ModelSpec, delta_lambda: f64, n0: usize) -> Result<Self> {
        model.validate()?;
        if !(delta_lambda.is_finite() && delta_lambda >= 0.0) {
            return Err(Error::invalid(format!(
                "delta_lambda must be >= 0, got {delta_lambda}"
            )));
        }
        let dim = model.sector_dim();
        check_index(n0, dim)?;
        Ok(Self {
            model,
            delta_lambda,
            n0,
        })
    }

    pub fn lambda0(&self) -> f64 {
        self.model.lambda()
    }

    pub fn perturbed_model(&self) -> ModelSpec {
        self.model.with_lambda(self.lambda0() + self.delta_lambda)
    }
}

fn check_index(n0: usize, dim: usize) -> Result<()> {
    if n0 == 0 || n0 > dim {
        return Err(Error::IndexOutOfRange { index: n0, dim });
    }
    Ok(())
}

/// Overlaps between a perturbed (rows) and unperturbed (columns) eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    overlaps: DenseMatrix,
    perturbed_energies: Vec<f64>,
}

impl OverlapMatrix {
    /// Wraps a precomputed overlap matrix (rows: perturbed states).
    pub fn from_parts(overlaps: DenseMatrix, perturbed_energies: Vec<f64>) -> Result<Self> {
        let n = perturbed_energies.len();
        if overlaps.rows() != n || overlaps.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: overlaps.rows(),
            });
        }
        Ok(Self {
            overlaps,
            perturbed_energies,
        })
    }

    pub fn dim(&self) -> usize {
        self.perturbed_energies.len()
    }

    /// `⟨m(λ0+δλ)|n(λ0)⟩`, 0-based.
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.overlaps.get(m, n)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.overlaps
    }

    pub fn perturbed_energies(&self) -> &[f64] {
        &self.perturbed_energies
    }

    /// Column `n0` (1-based): amplitudes of the initial state on the perturbed basis.
    pub fn initial_amplitudes(&self, n0: usize) -> Result<Vec<f64>> {
        check_index(n0, self.dim())?;
        Ok((0..self.dim()).map(|m| self.get(m, n0 - 1)).collect())
    }

    /// max(‖OᵀO − I‖, ‖OOᵀ − I‖)
    pub fn orthogonality_error(&self) -> f64 {
        let a = self
            .overlaps
            .transpose_matmul(&self.overlaps)
            .expect("square")
            .max_abs_deviation_from_identity();
        let b = self
            .overlaps
            .matmul_transpose(&self.overlaps)
            .expect("square")
            .max_abs_deviation_from_identity();
        a.max(b)
    }
}

/// `O = V_perturbedᵀ · V_unperturbed`.
///
/// Identical decompositions (a δλ = 0 quench) give the identity exactly.
pub fn overlap_matrix(
    unperturbed: &SpectralDecomposition,
    perturbed: &SpectralDecomposition,
) -> Result<OverlapMatrix> {
    if unperturbed.dim() != perturbed.dim() {
        return Err(Error::DimensionMismatch {
            expected: unperturbed.dim(),
            found: perturbed.dim(),
        });
    }
    let overlaps = if std::ptr::eq(unperturbed, perturbed) || unperturbed == perturbed {
        DenseMatrix::identity(unperturbed.dim())
    } else {
        perturbed
            .eigenvector_rows()
            .matmul_transpose(unperturbed.eigenvector_rows())?
    };
    Ok(OverlapMatrix {
        overlaps,
        perturbed_energies: perturbed.eigenvalues().to_vec(),
    })
}

/// Probability vector over the unperturbed eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionOverBasis {
    p: Vec<f64>,
}

impl DistributionOverBasis {
    /// Clamps tiny negative round-off to zero and checks normalization.
    pub fn new(mut p: Vec<f64>) -> Result<Self> {
        for (i, x) in p.iter_mut().enumerate() {
            if !x.is_finite() || *x < -NEGATIVE_SLACK {
                return Err(Error::invalid(format!("probability {i} is {x}")));
            }
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::invalid(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { p })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }
}

/// Shannon entropy −Σ p ln p (natural log, 0·ln 0 = 0).
pub fn diagonal_entropy(p: &DistributionOverBasis) -> f64 {
    shannon(&p.p)
}

fn shannon(p: &[f64]) -> f64 {
    let s: f64 = p
        .iter()
        .filter(|&&x| x >= LOG_FLOOR)
        .map(|&x| -x * x.ln())
        .sum();
    s.max(0.0)
}

/// `e^{-i·E·τ}` with the phase reduced modulo 2π before evaluation.
#[inline]
fn phase(energy: f64, tau: f64) -> (f64, f64) {
    let (s, c) = (energy * tau).rem_euclid(TAU).sin_cos();
    (c, -s)
}

/// `C_n(τ) = |⟨n|e^{−iH′τ}|n0⟩|²` for every unperturbed state `n`.
pub fn survival_distribution(
    o: &OverlapMatrix,
    n0: usize,
    tau: f64,
) -> Result<DistributionOverBasis> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::invalid(format!("tau must be >= 0, got {tau}")));
    }
    let c = survival_unchecked(o, n0, tau)?;
    DistributionOverBasis::new(c)
}

/// Same sum as [`survival_distribution`] but also accepts negative τ.
pub(crate) fn survival_unchecked(o: &OverlapMatrix, n0: usize, tau: f64) -> Result<Vec<f64>> {
    let amps = o.initial_amplitudes(n0)?;
    let dim = o.dim();
    let mut re = vec![0.0; dim];
    let mut im = vec![0.0; dim];
    for (m, &a) in amps.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let (cr, ci) = phase(o.perturbed_energies[m], tau);
        let (wr, wi) = (a * cr, a * ci);
        for ((r, i), &x) in re.iter_mut().zip(im.iter_mut()).zip(o.overlaps.row(m)) {
            *r += wr * x;
            *i += wi * x;
        }
    }
    Ok(re.iter().zip(&im).map(|(r, i)| r * r + i * i).collect())
}

/// Groups sorted perturbed energies into classes closer than the threshold.
fn degeneracy_classes(energies: &[f64]) -> Vec<std::ops::Range<usize>> {
    let span = match (energies.first(), energies.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let tol = DEGENERACY_THRESHOLD * span;
    let mut classes = Vec::new();
    let mut start = 0;
    for m in 1..=energies.len() {
        if m == energies.len() || energies[m] - energies[m - 1] > tol {
            classes.push(start..m);
            start = m;
        }
    }
    classes
}

/// Infinite-time average of `C_n(τ)`: the diagonal ensemble `μ_n`.
///
/// Perturbed levels closer than `DEGENERACY_THRESHOLD × span` are treated as
/// one level; their amplitudes add coherently before squaring.
pub fn diagonal_ensemble(o: &OverlapMatrix, n0: usize) -> Result<DistributionOverBasis> {
    let amps = o.initial_amplitudes(n0)?;
    let dim = o.dim();
    let mut mu = vec![0.0; dim];
    let mut coherent = vec![0.0; dim];
    for class in degeneracy_classes(&o.perturbed_energies) {
        if class.len() == 1 {
            let m = class.start;
            let w = amps[m] * amps[m];
            if w == 0.0 {
                continue;
            }
            for (acc, &x) in mu.iter_mut().zip(o.overlaps.row(m)) {
                *acc += w * x * x;
            }
        } else {
            coherent.fill(0.0);
            for m in class {
                let a = amps[m];
                for (acc, &x) in coherent.iter_mut().zip(o.overlaps.row(m)) {
                    *acc += a * x;
                }
            }
            for (acc, &v) in mu.iter_mut().zip(&coherent) {
                *acc += v * v;
            }
        }
    }
    DistributionOverBasis::new(mu)
}

/// Inverse participation ratio of the initial state in the perturbed basis.
pub fn ipr(o: &OverlapMatrix, n0: usize) -> Result<f64> {
    Ok(ipr_of_amplitudes(&o.initial_amplitudes(n0)?))
}

/// `1 / Σ a⁴` for the amplitudes of a normalized state.
pub fn ipr_of_amplitudes(amplitudes: &[f64]) -> f64 {
    let s: f64 = amplitudes.iter().map(|a| a.powi(4)).sum();
    1.0 / s
}

/// Sampled `S_D(τ)` over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyTrace {
    pub window: TimeWindow,
    pub times: Vec<f64>,
    pub samples: Vec<f64>,
}

impl EntropyTrace {
    pub fn mean(&self) -> f64 {
        window_stats(&self.samples).map(|s| s.0).unwrap_or(0.0)
    }

    /// `(mean, variance)` of the samples.
    pub fn stats(&self) -> (f64, f64) {
        window_stats(&self.samples).unwrap_or((0.0, 0.0))
    }
}

/// `S_D(τ_k)` at every point of `window`.
///
/// Times are processed in batches so the sum over perturbed states becomes a
/// matrix product; batches run in parallel and are assembled in order.
pub fn entropy_trace(o: &OverlapMatrix, n0: usize, window: &TimeWindow) -> Result<EntropyTrace> {
    window.validate()?;
    let amps = o.initial_amplitudes(n0)?;
    let times = window.times();
    let support: Vec<usize> = (0..o.dim()).filter(|&m| amps[m] != 0.0).collect();
    // Only perturbed states the initial state touches contribute.
    let dim = o.dim();
    let rows = support.len();
    let mut reduced = Vec::with_capacity(rows * dim);
    for &m in &support {
        reduced.extend_from_slice(o.overlaps.row(m));
    }

    if let [m] = support[..] {
        // A single perturbed eigencomponent carries no dynamics.
        let a2 = amps[m] * amps[m];
        let p: Vec<f64> = o.overlaps.row(m).iter().map(|x| a2 * x * x).collect();
        let s = shannon(&p);
        return Ok(EntropyTrace {
            window: *window,
            samples: vec![s; times.len()],
            times,
        });
    }

    let batches: Vec<&[f64]> = times.chunks(TIME_BATCH).collect();
    let per_batch = par::map(&batches, |batch| {
        let k = batch.len();
        // weights[m][t] = O[m][n0] · e^{−iE′_m τ_t}
        let mut wr = vec![0.0; rows * k];
        let mut wi = vec![0.0; rows * k];
        for (r, &m) in support.iter().enumerate() {
            let a = amps[m];
            let e = o.perturbed_energies[m];
            for (t, &tau) in batch.iter().enumerate() {
                let (cr, ci) = phase(e, tau);
                wr[r * k + t] = a * cr;
                wi[r * k + t] = a * ci;
            }
        }
        let ov = MatRef::row_major(&reduced, rows, dim).t();
        let mut re = vec![0.0; dim * k];
        let mut im = vec![0.0; dim * k];
        gemm(1.0, ov, MatRef::row_major(&wr, rows, k), 0.0, &mut re, k);
        gemm(1.0, ov, MatRef::row_major(&wi, rows, k), 0.0, &mut im, k);
        let mut probs = vec![0.0; dim];
        (0..k)
            .map(|t| {
                for (n, p) in probs.iter_mut().enumerate() {
                    let (x, y) = (re[n * k + t], im[n * k + t]);
                    *p = x * x + y * y;
                }
                shannon(&probs)
            })
            .collect::<Vec<f64>>()
    });
    let samples = per_batch.into_iter().flatten().collect();
    Ok(EntropyTrace {
        window: *window,
        times,
        samples,
    })
}
