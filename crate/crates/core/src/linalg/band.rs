//! Givens reduction of a narrow-band symmetric matrix to tridiagonal form.
//!
//! Each sub-band entry of a column is annihilated with a plane rotation and
//! the bulge it creates is chased down the band, so the whole reduction costs
//! O(n²·b) instead of the O(n³) of a dense Householder sweep.

/// Largest `|i − j|` over nonzero entries of a full row-major n×n matrix.
pub(crate) fn bandwidth(a: &[f64], n: usize) -> usize {
    (0..n)
        .map(|i| {
            let row = &a[i * n..i * n + i];
            row.iter().position(|&x| x != 0.0).map_or(0, |j| i - j)
        })
        .max()
        .unwrap_or(0)
}

/// Reduces `a` (full row-major storage, both triangles, bandwidth `b`) in
/// place. Returns `(diag, off)` with `off[i]` coupling `i` and `i+1`.
///
/// When `vecs` is given (row-major, `n` rows of `cols` entries) every rotation
/// is also applied to its rows, so each column `v` ends up as `G·v` where
/// `G·A·Gᵀ` is the tridiagonal result.
pub(crate) fn band_tridiagonalize(
    a: &mut [f64],
    n: usize,
    b: usize,
    mut vecs: Option<(&mut [f64], usize)>,
) -> (Vec<f64>, Vec<f64>) {
    if b > 1 {
        for k in 0..n.saturating_sub(2) {
            for r in (k + 2..=(k + b).min(n - 1)).rev() {
                if a[r * n + k] == 0.0 {
                    continue;
                }
                rotate(a, n, b, r, k, &mut vecs);
                // The rotation leaves a bulge at (p + b, p − 1); chase it out.
                let mut p = r;
                while p + b < n {
                    let (q, col) = (p + b, p - 1);
                    if a[q * n + col] == 0.0 {
                        break;
                    }
                    rotate(a, n, b, q, col, &mut vecs);
                    p = q;
                }
            }
        }
    }
    let diag = (0..n).map(|i| a[i * n + i]).collect();
    let off = (0..n)
        .map(|i| if i + 1 < n { a[(i + 1) * n + i] } else { 0.0 })
        .collect();
    (diag, off)
}

/// Rotation in the plane `(q − 1, q)` that zeroes `a[q][col]`, applied as
/// `A ← G·A·Gᵀ` over the rows and columns that can be nonzero.
fn rotate(a: &mut [f64], n: usize, b: usize, q: usize, col: usize, vecs: &mut Option<(&mut [f64], usize)>) {
    let p = q - 1;
    let x = a[p * n + col];
    let y = a[q * n + col];
    let r = x.hypot(y);
    let (c, s) = (x / r, y / r);
    let lo = p.saturating_sub(b);
    let hi = (q + b + 1).min(n);

    let (head, tail) = a.split_at_mut(q * n);
    let row_p = &mut head[p * n + lo..p * n + hi];
    let row_q = &mut tail[lo..hi];
    for (u, v) in row_p.iter_mut().zip(row_q.iter_mut()) {
        let (xu, xv) = (*u, *v);
        *u = c * xu + s * xv;
        *v = c * xv - s * xu;
    }
    for i in lo..hi {
        let row = &mut a[i * n..i * n + n];
        let (xu, xv) = (row[p], row[q]);
        row[p] = c * xu + s * xv;
        row[q] = c * xv - s * xu;
    }
    a[q * n + col] = 0.0;
    a[col * n + q] = 0.0;

    if let Some((v, cols)) = vecs.as_mut() {
        let cols = *cols;
        let (head, tail) = v.split_at_mut(q * cols);
        for (u, w) in head[p * cols..].iter_mut().zip(&mut tail[..cols]) {
            let (xu, xw) = (*u, *w);
            *u = c * xu + s * xw;
            *w = c * xw - s * xu;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandwidth_of_simple_patterns() {
        let eye = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(bandwidth(&eye, 3), 0);
        let corner = [1.0, 0.0, 2.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0];
        assert_eq!(bandwidth(&corner, 3), 2);
    }

    #[test]
    fn reduction_preserves_trace_and_frobenius_norm() {
        let n = 40;
        let b = 5;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i.saturating_sub(b)..=i {
                let v = ((i * 31 + j * 17) % 13) as f64 / 13.0 - 0.4;
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let frob: f64 = a.iter().map(|x| x * x).sum();
        let (d, e) = band_tridiagonalize(&mut a, n, b, None);
        let trace_t: f64 = d.iter().sum();
        let frob_t: f64 = d.iter().map(|x| x * x).sum::<f64>() + 2.0 * e.iter().map(|x| x * x).sum::<f64>();
        assert!((trace - trace_t).abs() < 1e-12);
        assert!((frob - frob_t).abs() < 1e-10);
        for i in 0..n {
            for j in 0..i.saturating_sub(1) {
                assert!(a[i * n + j].abs() < 1e-14, "({i},{j}) = {}", a[i * n + j]);
            }
        }
    }
}
