//! Dense symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form, explicit formation of the
//! orthogonal factor with blocked (compact WY) updates, then implicit-shift
//! QL on the tridiagonal. The QL rotations are recorded and replayed onto the
//! eigenvector matrix in column strips that fit in cache, which is where most
//! of the flops go for large sectors.

use super::band::{band_tridiagonalize, bandwidth};
use super::matrix::{dot, gemm, DenseMatrix, MatRef, SymmetricMatrix};
use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 64;
const WY_BLOCK: usize = 48;
const STRIP: usize = 32;
const ROTATION_BUFFER: usize = 1 << 22;

/// Ascending eigenvalues and orthonormal eigenvectors of a symmetric matrix.
///
/// Eigenvectors are stored one per row so each is a contiguous slice; use
/// [`SpectralDecomposition::eigenvector_matrix`] for the column layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    values: Vec<f64>,
    vectors: DenseMatrix,
}

impl SpectralDecomposition {
    /// Assembles a decomposition, sorting ascending and applying the sign rule.
    pub fn from_parts(values: Vec<f64>, vectors_as_rows: DenseMatrix) -> Result<Self> {
        let n = values.len();
        if vectors_as_rows.rows() != n || vectors_as_rows.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: vectors_as_rows.rows(),
            });
        }
        Ok(finalize(values, vectors_as_rows))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// The `k`-th eigenvector (0-based, ascending energy).
    pub fn eigenvector(&self, k: usize) -> &[f64] {
        self.vectors.row(k)
    }

    /// Row `k` is eigenvector `k`.
    pub fn eigenvector_rows(&self) -> &DenseMatrix {
        &self.vectors
    }

    /// Column `k` is eigenvector `k`.
    pub fn eigenvector_matrix(&self) -> DenseMatrix {
        self.vectors.transpose()
    }

    /// ‖VᵀV − I‖_max
    pub fn orthogonality_error(&self) -> f64 {
        self.vectors
            .matmul_transpose(&self.vectors)
            .expect("square")
            .max_abs_deviation_from_identity()
    }

    /// max_k ‖H·v_k − E_k·v_k‖₂
    pub fn max_residual(&self, h: &SymmetricMatrix) -> f64 {
        let hv = self.vectors.matmul_transpose(&h.to_dense()).expect("square");
        (0..self.dim())
            .map(|k| {
                let e = self.values[k];
                hv.row(k)
                    .iter()
                    .zip(self.eigenvector(k))
                    .map(|(a, v)| (a - e * v).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// ‖V·diag(E)·Vᵀ − H‖_max
    pub fn reconstruction_error(&self, h: &SymmetricMatrix) -> f64 {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let e = self.values[k];
            scaled.row_mut(k).iter_mut().for_each(|x| *x *= e);
        }
        let rebuilt = self.vectors.transpose_matmul(&scaled).expect("square");
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((rebuilt.get(i, j) - h.get(i, j)).abs());
            }
        }
        worst
    }
}

/// Full eigendecomposition of a real symmetric matrix.
pub fn eigh(h: &SymmetricMatrix) -> Result<SpectralDecomposition> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::invalid("cannot diagonalize an empty matrix"));
    }
    if let Some(idx) = h.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: idx / n,
            col: idx % n,
        });
    }
    let mut work = h.as_slice().to_vec();
    let (mut diag, sub, betas) = tridiagonalize(&mut work, n);
    let mut vectors = form_transformation(&work, &betas, n);
    drop(work);
    // `off[i]` couples i and i+1.
    let mut off: Vec<f64> = (0..n).map(|i| if i + 1 < n { sub[i + 1] } else { 0.0 }).collect();
    implicit_ql(&mut diag, &mut off, Some((vectors.as_mut_slice(), n)), n)?;
    Ok(finalize(diag, vectors))
}

/// Ascending eigenvalues only; skips all eigenvector work.
///
/// Narrow-band input (bandwidth below `dim / BAND_RATIO`) takes a Givens band
/// reduction instead of the dense Householder sweep.
pub fn eigvalsh(h: &SymmetricMatrix) -> Result<Vec<f64>> {
    let (mut diag, mut off) = reduce(h, None)?;
    let n = diag.len();
    implicit_ql(&mut diag, &mut off, None, n)?;
    diag.sort_by(f64::total_cmp);
    Ok(diag)
}

/// Eigenvalues together with the amplitudes `⟨k|v⟩` of a few vectors on the
/// eigenbasis, without forming the eigenvectors.
///
/// `amplitudes[c][k]` belongs to `vectors[c]` and eigenvalue `k` (ascending).
/// Signs are not fixed by any convention (there is no eigenvector to apply
/// the sign rule to), so only sign-independent quantities such as
/// `|⟨k|v⟩|²` are portable.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenProjection {
    pub eigenvalues: Vec<f64>,
    pub amplitudes: Vec<Vec<f64>>,
}

pub fn project_onto_eigenbasis(h: &SymmetricMatrix, vectors: &[&[f64]]) -> Result<EigenProjection> {
    let n = h.dim();
    let cols = vectors.len();
    let mut w = vec![0.0; n * cols];
    for (c, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: i, col: c });
        }
        for (i, &x) in v.iter().enumerate() {
            w[i * cols + c] = x;
        }
    }
    let (mut diag, mut off) = reduce(h, Some((&mut w, cols)))?;
    implicit_ql(&mut diag, &mut off, Some((&mut w, cols)), n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    Ok(EigenProjection {
        eigenvalues: order.iter().map(|&k| diag[k]).collect(),
        amplitudes: (0..cols)
            .map(|c| order.iter().map(|&k| w[k * cols + c]).collect())
            .collect(),
    })
}

/// Bandwidths below `dim / BAND_RATIO` take the band reduction.
const BAND_RATIO: usize = 8;

/// Tridiagonal `(diag, off)` similar to `h`. `w` (row-major, `n` rows of
/// `cols` entries), when given, is carried into the tridiagonal basis.
fn reduce(h: &SymmetricMatrix, w: Option<(&mut [f64], usize)>) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::invalid("cannot diagonalize an empty matrix"));
    }
    if let Some(idx) = h.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: idx / n,
            col: idx % n,
        });
    }
    let mut work = h.as_slice().to_vec();
    let b = bandwidth(&work, n);
    if b * BAND_RATIO < n {
        return Ok(band_tridiagonalize(&mut work, n, b, w));
    }
    let (diag, sub, betas) = tridiagonalize(&mut work, n);
    if let Some((w, cols)) = w {
        // Qᵀ·w = H_2·H_3 ⋯ H_{n−1}·w
        let mut t = vec![0.0; cols];
        for i in (2..n).rev() {
            let beta = betas[i];
            if beta == 0.0 {
                continue;
            }
            let u = &work[i * n..i * n + i];
            t.fill(0.0);
            for (r, &ur) in u.iter().enumerate() {
                for (tc, &x) in t.iter_mut().zip(&w[r * cols..(r + 1) * cols]) {
                    *tc += ur * x;
                }
            }
            t.iter_mut().for_each(|x| *x *= beta);
            for (r, &ur) in u.iter().enumerate() {
                for (x, &tc) in w[r * cols..(r + 1) * cols].iter_mut().zip(&t) {
                    *x -= ur * tc;
                }
            }
        }
    }
    let off = (0..n).map(|i| if i + 1 < n { sub[i + 1] } else { 0.0 }).collect();
    Ok((diag, off))
}

/// Reduces the lower triangle of `a` (row-major, n×n) to tridiagonal form.
///
/// Returns `(diag, sub, betas)` where `sub[i]` couples `i-1` and `i`. The
/// Householder vector of step `i` is left in `a[i][0..i]` with scale `betas[i]`
/// (reflector `I − β·u·uᵀ`, acting on indices `0..i`).
///
/// Each rank-2 update is deferred and fused into the next step's matvec, so
/// the trailing triangle is streamed once per step instead of twice.
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut diag = vec![0.0; n];
    let mut sub = vec![0.0; n];
    let mut betas = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut p = vec![0.0; n];
    // Pending update B ← B − pu·pqᵀ − pq·puᵀ on indices 0..pending.
    let mut pu = vec![0.0; n];
    let mut pq = vec![0.0; n];
    let mut pending = 0usize;

    for i in (1..n).rev() {
        if pending > 0 {
            rank2_row(&mut a[i * n..=i * n + i], &pu, &pq, i);
        }
        diag[i] = a[i * n + i];
        let l = i - 1;
        let row = &a[i * n..i * n + i];
        let alpha = row[l];
        let sigma = dot(&row[..l], &row[..l]);
        if i == 1 || sigma == 0.0 {
            if pending > 0 {
                for j in 0..i {
                    rank2_row(&mut a[j * n..=j * n + j], &pu, &pq, j);
                }
                pending = 0;
            }
            sub[i] = a[i * n + l];
            continue;
        }
        let norm = (alpha * alpha + sigma).sqrt();
        let g = if alpha >= 0.0 { -norm } else { norm };
        sub[i] = g;
        let half_norm_sq = norm * norm - alpha * g;
        let beta = 1.0 / half_norm_sq;
        betas[i] = beta;
        a[i * n + l] = alpha - g;
        u[..i].copy_from_slice(&a[i * n..i * n + i]);

        // p = β·B·u using only the lower triangle of the leading i×i block,
        // after bringing each row up to date.
        p[..i].fill(0.0);
        for j in 0..i {
            let r = &mut a[j * n..=j * n + j];
            let uj = u[j];
            let d = if pending > 0 {
                update_dot_axpy(r, &pu, &pq, &u, uj, &mut p[..j])
            } else {
                dot_axpy(&r[..j], &u[..j], uj, &mut p[..j])
            };
            p[j] += d + r[j] * uj;
        }
        p[..i].iter_mut().for_each(|x| *x *= beta);
        let k = 0.5 * beta * dot(&u[..i], &p[..i]);
        for j in 0..i {
            p[j] -= k * u[j];
        }
        std::mem::swap(&mut u, &mut pu);
        std::mem::swap(&mut p, &mut pq);
        pending = i;
    }
    diag[0] = a[0];
    (diag, sub, betas)
}

/// Returns `x·y` and adds `a·x` to `acc` in the same pass over `x`.
#[inline]
fn dot_axpy(x: &[f64], y: &[f64], a: f64, acc: &mut [f64]) -> f64 {
    let n = x.len();
    let mut s = [0.0f64; 4];
    let body = n - n % 4;
    for k in (0..body).step_by(4) {
        for l in 0..4 {
            let xv = x[k + l];
            s[l] += xv * y[k + l];
            acc[k + l] += a * xv;
        }
    }
    let mut tail = 0.0;
    for k in body..n {
        tail += x[k] * y[k];
        acc[k] += a * x[k];
    }
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}

/// [`rank2_row`] on row `j = r.len() − 1`, then [`dot_axpy`] on its
/// off-diagonal part, in one pass.
#[inline]
fn update_dot_axpy(r: &mut [f64], pu: &[f64], pq: &[f64], y: &[f64], a: f64, acc: &mut [f64]) -> f64 {
    let j = r.len() - 1;
    let (uj, qj) = (pu[j], pq[j]);
    r[j] -= 2.0 * uj * qj;
    let (x, pu, pq, y) = (&mut r[..j], &pu[..j], &pq[..j], &y[..j]);
    let mut s = [0.0f64; 4];
    let body = j - j % 4;
    for k in (0..body).step_by(4) {
        for l in 0..4 {
            let xv = x[k + l] - (uj * pq[k + l] + qj * pu[k + l]);
            x[k + l] = xv;
            s[l] += xv * y[k + l];
            acc[k + l] += a * xv;
        }
    }
    let mut tail = 0.0;
    for k in body..j {
        let xv = x[k] - (uj * pq[k] + qj * pu[k]);
        x[k] = xv;
        tail += xv * y[k];
        acc[k] += a * xv;
    }
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}

/// `r[k] −= u[j]·q[k] + q[j]·u[k]` for `k ≤ j`, where `r` is row `j`.
#[inline]
fn rank2_row(r: &mut [f64], u: &[f64], q: &[f64], j: usize) {
    let (uj, qj) = (u[j], q[j]);
    for ((x, &uk), &qk) in r.iter_mut().zip(&u[..=j]).zip(&q[..=j]) {
        *x -= uj * qk + qj * uk;
    }
}

/// Forms `Qᵀ` (rows are the columns of `Q`) from the stored reflectors, where
/// `T = QᵀAQ`. Reflectors are applied in blocks via compact WY updates.
fn form_transformation(a: &[f64], betas: &[f64], n: usize) -> DenseMatrix {
    let mut e = DenseMatrix::identity(n);
    let mut start = 2;
    while start < n {
        let end = (start + WY_BLOCK).min(n);
        let b = end - start;
        let m = end - 1;

        let mut y = vec![0.0; m * b];
        for c in 0..b {
            let i = start + c;
            if betas[i] != 0.0 {
                for r in 0..i {
                    y[r * b + c] = a[i * n + r];
                }
            }
        }
        // Upper-triangular T with H_start···H_{end-1} = I − Y·T·Yᵀ.
        let mut t = vec![0.0; b * b];
        let mut z = vec![0.0; b];
        for c in 0..b {
            let beta = betas[start + c];
            t[c * b + c] = beta;
            if c == 0 || beta == 0.0 {
                continue;
            }
            for (k, zk) in z.iter_mut().enumerate().take(c) {
                *zk = (0..m).map(|r| y[r * b + k] * y[r * b + c]).sum();
            }
            for r in 0..c {
                let s: f64 = (r..c).map(|k| t[r * b + k] * z[k]).sum();
                t[r * b + c] = -beta * s;
            }
        }

        let ld = n;
        let mut w = vec![0.0; m * b];
        gemm(
            1.0,
            MatRef::strided(e.as_slice(), m, m, ld),
            MatRef::row_major(&y, m, b),
            0.0,
            &mut w,
            b,
        );
        let mut wt = vec![0.0; m * b];
        gemm(
            1.0,
            MatRef::row_major(&w, m, b),
            MatRef::row_major(&t, b, b),
            0.0,
            &mut wt,
            b,
        );
        gemm(
            -1.0,
            MatRef::row_major(&wt, m, b),
            MatRef::row_major(&y, m, b).t(),
            1.0,
            e.as_mut_slice(),
            ld,
        );
        start = end;
    }
    e
}

/// One QL sweep: rotations for `i = m-1, …, l` stored from `offset`.
struct Sweep {
    low: usize,
    high: usize,
    offset: usize,
}

#[derive(Default)]
struct RotationLog {
    sweeps: Vec<Sweep>,
    rotations: Vec<[f64; 2]>,
}

impl RotationLog {
    fn begin(&mut self, low: usize, high: usize) {
        self.sweeps.push(Sweep {
            low,
            high,
            offset: self.rotations.len(),
        });
    }

    fn is_full(&self) -> bool {
        self.rotations.len() >= ROTATION_BUFFER
    }

    /// Replays the logged rotations onto the rows of `vecs` (row-major with
    /// `n` columns) and clears the log.
    fn flush(&mut self, vecs: &mut [f64], n: usize) {
        if self.sweeps.is_empty() {
            return;
        }
        let lo = self.sweeps.iter().map(|s| s.low).min().unwrap_or(0);
        let hi = self.sweeps.iter().map(|s| s.high).max().unwrap_or(0);
        let rows = hi - lo + 1;
        let mut strip = vec![0.0; rows * STRIP];
        let mut carry = [0.0f64; STRIP];
        for c0 in (0..n).step_by(STRIP) {
            let w = STRIP.min(n - c0);
            for r in 0..rows {
                let src = &vecs[(lo + r) * n + c0..(lo + r) * n + c0 + w];
                strip[r * STRIP..r * STRIP + w].copy_from_slice(src);
            }
            for sweep in &self.sweeps {
                let (l, m) = (sweep.low - lo, sweep.high - lo);
                carry.copy_from_slice(&strip[m * STRIP..(m + 1) * STRIP]);
                let rots = &self.rotations[sweep.offset..sweep.offset + (m - l)];
                for (i, &[c, s]) in (l..m).rev().zip(rots) {
                    let (head, tail) = strip.split_at_mut((i + 1) * STRIP);
                    let x = &head[i * STRIP..];
                    let next = &mut tail[..STRIP];
                    for k in 0..STRIP {
                        let xk = x[k];
                        next[k] = s * xk + c * carry[k];
                        carry[k] = c * xk - s * carry[k];
                    }
                }
                strip[l * STRIP..(l + 1) * STRIP].copy_from_slice(&carry);
            }
            for r in 0..rows {
                let dst = &mut vecs[(lo + r) * n + c0..(lo + r) * n + c0 + w];
                dst.copy_from_slice(&strip[r * STRIP..r * STRIP + w]);
            }
        }
        self.sweeps.clear();
        self.rotations.clear();
    }
}

/// Implicit-shift QL on the tridiagonal (`diag`, `off`), accumulating the
/// rotations into the rows of `vecs` when given.
///
/// `vecs` is `(rows, cols)`: a row-major buffer with `n` rows of `cols`
/// entries, row `i` following basis index `i`.
fn implicit_ql(
    diag: &mut [f64],
    off: &mut [f64],
    mut vecs: Option<(&mut [f64], usize)>,
    n: usize,
) -> Result<()> {
    let eps = f64::EPSILON;
    let mut log = RotationLog::default();
    let mut shift_total = 0.0;
    let mut scale = 0.0f64;
    for l in 0..n {
        scale = scale.max(diag[l].abs() + off[l].abs());
        let mut m = l;
        while m < n - 1 && off[m].abs() > eps * scale {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence { dim: n });
                }
                let g = diag[l];
                let mut p = (diag[l + 1] - g) / (2.0 * off[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                diag[l] = off[l] / (p + r);
                diag[l + 1] = off[l] * (p + r);
                let dl1 = diag[l + 1];
                let h = g - diag[l];
                for d in diag.iter_mut().skip(l + 2) {
                    *d -= h;
                }
                shift_total += h;

                p = diag[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = off[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                if vecs.is_some() {
                    log.begin(l, m);
                }
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * off[i];
                    let h = c * p;
                    r = p.hypot(off[i]);
                    off[i + 1] = s * r;
                    s = off[i] / r;
                    c = p / r;
                    p = c * diag[i] - s * g;
                    diag[i + 1] = h + s * (c * g + s * diag[i]);
                    if vecs.is_some() {
                        log.rotations.push([c, s]);
                    }
                }
                p = -s * s2 * c3 * el1 * off[l] / dl1;
                off[l] = s * p;
                diag[l] = c * p;
                if log.is_full() {
                    if let Some((v, cols)) = vecs.as_mut() {
                        log.flush(v, *cols);
                    }
                }
                if off[l].abs() <= eps * scale {
                    break;
                }
            }
        }
        diag[l] += shift_total;
        off[l] = 0.0;
    }
    if let Some((v, cols)) = vecs {
        log.flush(v, cols);
    }
    Ok(())
}

/// Sorts ascending (stable) and flips each vector so its largest-magnitude
/// entry is positive.
fn finalize(values: Vec<f64>, vectors: DenseMatrix) -> SpectralDecomposition {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let mut sorted = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let row = sorted.row_mut(dst);
        row.copy_from_slice(vectors.row(src));
        let mut pivot = 0;
        for (i, x) in row.iter().enumerate() {
            if x.abs() > row[pivot].abs() {
                pivot = i;
            }
        }
        if row[pivot] < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
    }
    SpectralDecomposition {
        values: sorted_values,
        vectors: sorted,
    }
}
