//! Golub–Reinsch SVD of a tall matrix, returning only the thin left factor
//! and the singular values. The right factor is never accumulated.

use super::householder::{make_reflector, reflect_columns};
use super::matrix::{axpy, Matrix};
use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const MAX_SWEEPS_PER_VALUE: usize = 75;

/// `(r, c, s)` with `c f + s g = r` and `−s f + c g = 0`.
#[inline]
pub(crate) fn givens(f: f64, g: f64) -> (f64, f64, f64) {
    if g == 0.0 {
        return (f, 1.0, 0.0);
    }
    let r = f.hypot(g);
    (r, f / r, g / r)
}

/// Replaces columns `a`, `b` of `u` by `c·a + s·b` and `−s·a + c·b`.
#[inline]
fn rotate_columns(u: &mut Matrix, a: usize, b: usize, c: f64, s: f64) {
    let (ca, cb) = u.col_pair_mut(a, b);
    for (x, y) in ca.iter_mut().zip(cb.iter_mut()) {
        let (xa, yb) = (*x, *y);
        *x = c * xa + s * yb;
        *y = -s * xa + c * yb;
    }
}

/// Householder reduction `A = U_B B V_Bᵀ` to upper bidiagonal form.
/// Returns the diagonal, the superdiagonal and the thin `p×n` matrix `U_B`.
fn bidiagonalize(a: &Matrix) -> (Vec<f64>, Vec<f64>, Matrix) {
    let (p, n) = (a.rows(), a.cols());
    let mut f = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut left_tau = vec![0.0; n];

    let mut row = vec![0.0; n];
    let mut w = vec![0.0; p];
    for k in 0..n {
        let tau = make_reflector(&mut f.col_mut(k)[k..]);
        left_tau[k] = tau;
        d[k] = f[(k, k)];
        if tau != 0.0 {
            let (head, tail) = f.as_mut_slice().split_at_mut((k + 1) * p);
            let v = &head[k * p + k + 1..(k + 1) * p];
            reflect_columns(v, tau, tail, p, k, 0..n - k - 1);
        }
        if k + 1 < n {
            // right reflector on row k, columns k+1..
            let x = &mut row[k + 1..n];
            for (j, xj) in x.iter_mut().enumerate() {
                *xj = f[(k, k + 1 + j)];
            }
            let tau = make_reflector(x);
            e[k] = x[0];
            if tau != 0.0 {
                x[0] = 1.0;
                // A ← A − τ (A v) vᵀ on rows k+1.., columns k+1..
                let w = &mut w[k + 1..p];
                w.iter_mut().for_each(|v| *v = 0.0);
                for (j, &vj) in x.iter().enumerate() {
                    axpy(vj, &f.col(k + 1 + j)[k + 1..], w);
                }
                for (j, &vj) in x.iter().enumerate() {
                    axpy(-tau * vj, w, &mut f.col_mut(k + 1 + j)[k + 1..]);
                }
            }
        }
    }

    let mut u = Matrix::zeros(p, n);
    for i in 0..n {
        u[(i, i)] = 1.0;
    }
    for k in (0..n).rev() {
        let tau = left_tau[k];
        if tau == 0.0 {
            continue;
        }
        reflect_columns(&f.col(k)[k + 1..], tau, u.as_mut_slice(), p, k, k..n);
    }
    (d, e, u)
}

/// Implicit-shift QR on the bidiagonal `(d, e)`, accumulating left rotations into `u`.
fn bidiagonal_qr(d: &mut [f64], e: &mut [f64], u: &mut Matrix) -> Result<()> {
    let n = d.len();
    if n < 2 {
        return Ok(());
    }
    let anorm = d.iter().chain(e.iter()).fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let small = EPS * anorm;
    let max_iter = MAX_SWEEPS_PER_VALUE * n;
    let mut iter = 0;

    loop {
        for i in 0..n - 1 {
            if e[i].abs() <= EPS * (d[i].abs() + d[i + 1].abs()) || e[i].abs() <= small {
                e[i] = 0.0;
            }
        }
        let mut hi = n - 1;
        while hi > 0 && e[hi - 1] == 0.0 {
            hi -= 1;
        }
        if hi == 0 {
            return Ok(());
        }
        let mut lo = hi - 1;
        while lo > 0 && e[lo - 1] != 0.0 {
            lo -= 1;
        }

        if let Some(i) = (lo..hi).find(|&i| d[i].abs() <= small) {
            // zero diagonal: annihilate row i's superdiagonal from the left
            d[i] = 0.0;
            let mut f = e[i];
            e[i] = 0.0;
            for j in i + 1..=hi {
                let (r, c, s) = givens(d[j], f);
                d[j] = r;
                rotate_columns(u, j, i, c, s);
                if j < hi {
                    f = -s * e[j];
                    e[j] *= c;
                }
            }
            continue;
        }
        if d[hi].abs() <= small {
            // zero trailing diagonal: chase up the last column from the right
            d[hi] = 0.0;
            let mut f = e[hi - 1];
            e[hi - 1] = 0.0;
            for j in (lo..hi).rev() {
                let (r, c, s) = givens(d[j], f);
                d[j] = r;
                if j > lo {
                    f = -s * e[j - 1];
                    e[j - 1] *= c;
                }
            }
            continue;
        }

        iter += 1;
        if iter > max_iter {
            return Err(Error::NoConvergence("bidiagonal QR iteration"));
        }
        golub_kahan_step(d, e, u, lo, hi);
    }
}

fn golub_kahan_step(d: &mut [f64], e: &mut [f64], u: &mut Matrix, lo: usize, hi: usize) {
    // Wilkinson shift from the trailing 2x2 block of BᵀB
    let dm = d[hi - 1];
    let em = if hi - 1 > lo { e[hi - 2] } else { 0.0 };
    let (dn, en) = (d[hi], e[hi - 1]);
    let t11 = dm * dm + em * em;
    let t12 = dm * en;
    let t22 = dn * dn + en * en;
    let shift = if t12 == 0.0 {
        t22
    } else {
        let delta = 0.5 * (t11 - t22);
        let sign = if delta >= 0.0 { 1.0 } else { -1.0 };
        t22 - t12 * t12 / (delta + sign * delta.hypot(t12))
    };

    let mut f = d[lo] * d[lo] - shift;
    let mut g = d[lo] * e[lo];
    for k in lo..hi {
        let (r, c, s) = givens(f, g);
        if k > lo {
            e[k - 1] = r;
        }
        let f2 = c * d[k] + s * e[k];
        e[k] = -s * d[k] + c * e[k];
        let bulge = s * d[k + 1];
        d[k + 1] *= c;

        let (r, c, s) = givens(f2, bulge);
        d[k] = r;
        let ek = e[k];
        e[k] = c * ek + s * d[k + 1];
        d[k + 1] = -s * ek + c * d[k + 1];
        rotate_columns(u, k, k + 1, c, s);
        if k + 1 < hi {
            f = e[k];
            g = s * e[k + 1];
            e[k + 1] *= c;
        }
    }
}

/// Thin SVD `A = U diag(δ) Vᵀ` of a `p×n` matrix with `p >= n`.
///
/// Returns `U` (p×n, orthonormal columns) and `δ` (descending, nonnegative).
/// Column signs are not canonicalized here.
pub(crate) fn golub_reinsch(a: &Matrix) -> Result<(Matrix, Vec<f64>)> {
    let (p, n) = (a.rows(), a.cols());
    if p < n {
        return Err(Error::Shape(format!("SVD kernel needs rows >= cols, got {p}x{n}")));
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        let mut u = Matrix::zeros(p, n);
        for i in 0..n {
            u[(i, i)] = 1.0;
        }
        return Ok((u, vec![0.0; n]));
    }
    let (mut d, mut e, mut u) = bidiagonalize(&a.scaled(1.0 / scale));
    bidiagonal_qr(&mut d, &mut e, &mut u)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].abs().total_cmp(&d[i].abs()));
    let values = order.iter().map(|&i| d[i].abs() * scale).collect();
    let mut sorted = Matrix::zeros(p, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.col_mut(dst).copy_from_slice(u.col(src));
    }
    Ok((sorted, values))
}
