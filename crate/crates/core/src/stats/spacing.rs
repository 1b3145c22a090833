//! Level-spacing diagnostics: polynomial unfolding, Kolmogorov–Smirnov
//! distances to the Poisson and Wigner-surmise laws, and a Brody fit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

pub const MIN_LEVELS: usize = 100;
const BRODY_Q_MAX: f64 = 1.2;
const BRODY_TOL: f64 = 1e-7;
/// Zero spacings would send `ln s` to −∞ in the likelihood.
const SPACING_FLOOR: f64 = 1e-12;
const HIST_BIN: f64 = 0.1;
const HIST_MAX: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnfoldOptions {
    pub poly_degree: usize,
    /// Fraction of levels dropped at each spectral edge.
    pub trim_fraction: f64,
}

impl Default for UnfoldOptions {
    fn default() -> Self {
        Self {
            poly_degree: 6,
            trim_fraction: 0.1,
        }
    }
}

/// Unfolded nearest-neighbour spacings with unit mean.
///
/// The staircase `N(E)` of the kept levels is fitted by a polynomial in the
/// energy rescaled to `[-1, 1]`, so the result does not depend on the energy
/// unit.
pub fn unfold_spectrum(eigenvalues: &[f64], opts: &UnfoldOptions) -> Result<Vec<f64>> {
    if !(0.0..0.5).contains(&opts.trim_fraction) {
        return Err(Error::invalid(format!(
            "trim_fraction must be in [0, 0.5), got {}",
            opts.trim_fraction
        )));
    }
    let mut levels = eigenvalues.to_vec();
    levels.sort_by(f64::total_cmp);
    let n = levels.len();
    let cut = (opts.trim_fraction * n as f64).floor() as usize;
    let kept = &levels[cut..n - cut];
    if kept.len() < MIN_LEVELS {
        return Err(Error::TooFewLevels {
            needed: MIN_LEVELS,
            found: kept.len(),
        });
    }
    let (lo, hi) = (kept[0], kept[kept.len() - 1]);
    if !(hi > lo) {
        return Err(Error::Degenerate("all levels coincide".into()));
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let x: Vec<f64> = kept.iter().map(|e| (e - mid) / half).collect();
    let staircase: Vec<f64> = (0..kept.len()).map(|k| (cut + k + 1) as f64).collect();
    let coeffs = legendre_least_squares(&x, &staircase, opts.poly_degree)?;
    let smooth: Vec<f64> = x.iter().map(|&t| legendre_eval(&coeffs, t)).collect();
    let mut s: Vec<f64> = smooth.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::Degenerate("unfolded staircase is not increasing".into()));
    }
    s.iter_mut().for_each(|v| *v /= mean);
    Ok(s)
}

fn legendre_row(t: f64, degree: usize, out: &mut [f64]) {
    out[0] = 1.0;
    if degree >= 1 {
        out[1] = t;
    }
    for k in 2..=degree {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * t * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
}

fn legendre_eval(coeffs: &[f64], t: f64) -> f64 {
    let mut row = vec![0.0; coeffs.len()];
    legendre_row(t, coeffs.len() - 1, &mut row);
    row.iter().zip(coeffs).map(|(a, b)| a * b).sum()
}

/// Least squares in the Legendre basis via Householder QR.
fn legendre_least_squares(x: &[f64], y: &[f64], degree: usize) -> Result<Vec<f64>> {
    let cols = degree + 1;
    let rows = x.len();
    if rows < cols {
        return Err(Error::TooFewLevels {
            needed: cols,
            found: rows,
        });
    }
    // Column-major design matrix.
    let mut a = vec![0.0; rows * cols];
    let mut row = vec![0.0; cols];
    for (i, &t) in x.iter().enumerate() {
        legendre_row(t, degree, &mut row);
        for j in 0..cols {
            a[j * rows + i] = row[j];
        }
    }
    let mut b = y.to_vec();
    for j in 0..cols {
        let col = &a[j * rows..(j + 1) * rows];
        let norm = col[j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Degenerate("rank-deficient unfolding fit".into()));
        }
        let alpha = if col[j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = col[j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for k in j..cols {
            let c = &mut a[k * rows + j..(k + 1) * rows];
            let f = 2.0 * v.iter().zip(c.iter()).map(|(p, q)| p * q).sum::<f64>() / vnorm2;
            c.iter_mut().zip(&v).for_each(|(q, p)| *q -= f * p);
        }
        let f = 2.0 * v.iter().zip(&b[j..]).map(|(p, q)| p * q).sum::<f64>() / vnorm2;
        b[j..].iter_mut().zip(&v).for_each(|(q, p)| *q -= f * p);
    }
    let mut coeffs = vec![0.0; cols];
    for j in (0..cols).rev() {
        let mut s = b[j];
        for k in j + 1..cols {
            s -= a[k * rows + j] * coeffs[k];
        }
        coeffs[j] = s / a[j * rows + j];
    }
    Ok(coeffs)
}

pub fn poisson_cdf(s: f64) -> f64 {
    1.0 - (-s).exp()
}

pub fn wigner_cdf(s: f64) -> f64 {
    1.0 - (-PI * s * s / 4.0).exp()
}

/// Sup-norm distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

fn brody_b(q: f64) -> f64 {
    gamma((q + 2.0) / (q + 1.0)).powf(q + 1.0)
}

/// Brody density `(q+1)·b·s^q·exp(−b·s^{q+1})`.
pub fn brody_pdf(s: f64, q: f64) -> f64 {
    let b = brody_b(q);
    (q + 1.0) * b * s.powf(q) * (-b * s.powf(q + 1.0)).exp()
}

fn brody_log_likelihood(q: f64, n: f64, sum_ln: f64, spacings: &[f64]) -> f64 {
    let b = brody_b(q);
    let tail: f64 = spacings.iter().map(|s| s.powf(q + 1.0)).sum();
    n * ((q + 1.0).ln() + b.ln()) + q * sum_ln - b * tail
}

/// Maximum-likelihood Brody parameter on `[0, 1.2]` (golden-section search).
pub fn brody_fit(spacings: &[f64]) -> Result<f64> {
    if spacings.len() < MIN_LEVELS {
        return Err(Error::TooFewLevels {
            needed: MIN_LEVELS,
            found: spacings.len(),
        });
    }
    if spacings.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::invalid("spacings must be finite and non-negative"));
    }
    let (min, max) = spacings
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    if max - min <= 1e-9 * mean.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Degenerate(
            "all spacings are equal (picket fence); Brody fit undefined".into(),
        ));
    }
    let s: Vec<f64> = spacings.iter().map(|&x| x.max(SPACING_FLOOR)).collect();
    let n = s.len() as f64;
    let sum_ln: f64 = s.iter().map(|x| x.ln()).sum();
    let f = |q: f64| -brody_log_likelihood(q, n, sum_ln, &s);

    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, BRODY_Q_MAX);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > BRODY_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let q = 0.5 * (a + b);
    // The interior optimum can sit on the boundary; compare endpoints too.
    let best = [0.0, q, BRODY_Q_MAX]
        .into_iter()
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap_or(q);
    Ok(best.clamp(0.0, BRODY_Q_MAX))
}

/// Density histogram of unfolded spacings on `[0, 5)` in bins of 0.1.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    pub density: Vec<f64>,
    /// Samples at or beyond the last bin edge.
    pub overflow: usize,
}

pub fn histogram(spacings: &[f64]) -> Histogram {
    let bins = (HIST_MAX / HIST_BIN).round() as usize;
    let mut counts = vec![0usize; bins];
    let mut overflow = 0;
    for &s in spacings {
        let k = (s / HIST_BIN).floor();
        if k >= 0.0 && (k as usize) < bins {
            counts[k as usize] += 1;
        } else {
            overflow += 1;
        }
    }
    let norm = spacings.len().max(1) as f64 * HIST_BIN;
    Histogram {
        bin_width: HIST_BIN,
        density: counts.iter().map(|&c| c as f64 / norm).collect(),
        overflow,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingStats {
    pub spacings: Vec<f64>,
    pub histogram: Histogram,
    pub brody_q: f64,
    pub ks_poisson: f64,
    pub ks_wigner: f64,
}

impl SpacingStats {
    pub fn level_count(&self) -> usize {
        self.spacings.len() + 1
    }
}

pub fn spacing_stats(eigenvalues: &[f64], opts: &UnfoldOptions) -> Result<SpacingStats> {
    let spacings = unfold_spectrum(eigenvalues, opts)?;
    let brody_q = brody_fit(&spacings)?;
    Ok(SpacingStats {
        histogram: histogram(&spacings),
        ks_poisson: ks_distance(&spacings, poisson_cdf),
        ks_wigner: ks_distance(&spacings, wigner_cdf),
        brody_q,
        spacings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picket_fence_unfolds_to_unit_spacings() {
        let levels: Vec<f64> = (0..500).map(|k| 0.3 * k as f64 - 7.0).collect();
        let s = unfold_spectrum(&levels, &UnfoldOptions::default()).unwrap();
        assert!(s.iter().all(|v| (v - 1.0).abs() < 1e-8));
        assert!(matches!(brody_fit(&s), Err(Error::Degenerate(_))));
    }

    #[test]
    fn too_few_levels() {
        let levels: Vec<f64> = (0..110).map(|k| k as f64).collect();
        assert!(matches!(
            unfold_spectrum(&levels, &UnfoldOptions::default()),
            Err(Error::TooFewLevels { .. })
        ));
        assert!(brody_fit(&[1.0; 50]).is_err());
    }

    #[test]
    fn least_squares_recovers_exact_polynomial() {
        let x: Vec<f64> = (0..50).map(|k| -1.0 + 2.0 * k as f64 / 49.0).collect();
        let y: Vec<f64> = x.iter().map(|t| 3.0 - t + 0.5 * t * t * t).collect();
        let c = legendre_least_squares(&x, &y, 4).unwrap();
        for (&t, &v) in x.iter().zip(&y) {
            assert!((legendre_eval(&c, t) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn brody_density_limits() {
        for s in [0.1, 0.5, 1.0, 2.5] {
            assert!((brody_pdf(s, 0.0) - (-s).exp()).abs() < 1e-12);
            let wigner = PI * s / 2.0 * (-PI * s * s / 4.0).exp();
            assert!((brody_pdf(s, 1.0) - wigner).abs() < 1e-12);
        }
    }

    #[test]
    fn ks_distance_of_exact_quantiles_is_small() {
        let n = 1000;
        let samples: Vec<f64> = (0..n)
            .map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln())
            .collect();
        assert!(ks_distance(&samples, poisson_cdf) <= 0.5 / n as f64 + 1e-12);
    }

    #[test]
    fn histogram_integrates_to_one() {
        let s = [0.05, 0.15, 0.15, 1.0, 7.0];
        let h = histogram(&s);
        assert_eq!(h.overflow, 1);
        let total: f64 = h.density.iter().sum::<f64>() * h.bin_width;
        assert!((total - 0.8).abs() < 1e-12);
    }
}
