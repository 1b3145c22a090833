//! Cyclic Jacobi eigensolver for small matrices.
//!
//! Slow (many O(d³) sweeps) but shares no code path with [`super::eigh`],
//! which makes it a useful cross-check.

use super::eigh::SpectralDecomposition;
use super::matrix::{DenseMatrix, SymmetricMatrix};
use crate::error::{Error, Result};

pub const JACOBI_MAX_DIM: usize = 64;
const MAX_SWEEPS: usize = 100;

pub fn jacobi_eigh(h: &SymmetricMatrix) -> Result<SpectralDecomposition> {
    let n = h.dim();
    if n == 0 || n > JACOBI_MAX_DIM {
        return Err(Error::invalid(format!(
            "jacobi solver supports 1..={JACOBI_MAX_DIM}, got {n}"
        )));
    }
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| h.row(i).to_vec()).collect();
    // v[k] is the current k-th eigenvector estimate.
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let norm: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * norm.max(f64::MIN_POSITIVE) {
            let values = (0..n).map(|i| a[i][i]).collect();
            let rows = DenseMatrix::from_fn(n, n, |k, r| v[k][r]);
            return SpectralDecomposition::from_parts(values, rows);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (xp, xq) = (row[p], row[q]);
                    row[p] = c * xp - s * xq;
                    row[q] = s * xp + c * xq;
                }
                for k in 0..n {
                    let (xp, xq) = (a[p][k], a[q][k]);
                    a[p][k] = c * xp - s * xq;
                    a[q][k] = s * xp + c * xq;
                }
                let (vp, vq) = (v[p].clone(), v[q].clone());
                for k in 0..n {
                    v[p][k] = c * vp[k] - s * vq[k];
                    v[q][k] = s * vp[k] + c * vq[k];
                }
            }
        }
    }
    Err(Error::NoConvergence { dim: n })
}
