//! Symmetric eigendecomposition: Householder tridiagonalization followed by
//! the implicit QL iteration with Wilkinson shifts.

use super::householder::{make_reflector, reflect_columns};
use super::matrix::{dot, Matrix};
use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const MAX_ITER_PER_VALUE: usize = 30;

struct Tridiagonal {
    diag: Vec<f64>,
    /// `sub[i]` couples rows `i` and `i + 1`; the last entry is zero.
    sub: Vec<f64>,
    /// Reflector tails below the subdiagonal, one column per step.
    reflectors: Matrix,
    tau: Vec<f64>,
}

/// Reduces `A = Q T Qᵀ`, touching only the lower triangle of `a`.
fn tridiagonalize(mut a: Matrix) -> Tridiagonal {
    let p = a.rows();
    let mut tau = vec![0.0; p.saturating_sub(2)];
    let mut sub = vec![0.0; p];
    let mut w = vec![0.0; p];
    let mut v = vec![0.0; p];

    for k in 0..p.saturating_sub(2) {
        let t = make_reflector(&mut a.col_mut(k)[k + 1..]);
        tau[k] = t;
        sub[k] = a[(k + 1, k)];
        if t == 0.0 {
            continue;
        }
        let m = p - k - 1;
        let v = &mut v[..m];
        v[0] = 1.0;
        v[1..].copy_from_slice(&a.col(k)[k + 2..]);
        let w = &mut w[..m];

        // w = τ A₂₂ v from the lower triangle
        w.iter_mut().for_each(|x| *x = 0.0);
        for jj in 0..m {
            let col = &a.col(k + 1 + jj)[k + 1..];
            let vj = v[jj];
            let mut acc = col[jj] * vj;
            for ii in jj + 1..m {
                w[ii] += col[ii] * vj;
                acc += col[ii] * v[ii];
            }
            w[jj] += acc;
        }
        w.iter_mut().for_each(|x| *x *= t);
        let alpha = -0.5 * t * dot(w, v);
        for (wi, vi) in w.iter_mut().zip(v.iter()) {
            *wi += alpha * vi;
        }

        // A₂₂ ← A₂₂ − v wᵀ − w vᵀ, lower triangle only
        for jj in 0..m {
            let (wj, vj) = (w[jj], v[jj]);
            let col = &mut a.col_mut(k + 1 + jj)[k + 1..];
            for ii in jj..m {
                col[ii] -= v[ii] * wj + w[ii] * vj;
            }
        }
    }
    if p >= 2 {
        sub[p - 2] = a[(p - 1, p - 2)];
    }
    let diag = (0..p).map(|i| a[(i, i)]).collect();
    Tridiagonal {
        diag,
        sub,
        reflectors: a,
        tau,
    }
}

impl Tridiagonal {
    /// Explicit `Q = H₀ H₁ ⋯` by backward accumulation.
    fn q(&self) -> Matrix {
        let p = self.diag.len();
        let mut q = Matrix::identity(p);
        for k in (0..self.tau.len()).rev() {
            let t = self.tau[k];
            if t == 0.0 {
                continue;
            }
            let v = &self.reflectors.col(k)[k + 2..];
            reflect_columns(v, t, q.as_mut_slice(), p, k + 1, k + 1..p);
        }
        q
    }
}

/// Implicit QL on `(d, e)` (`e[i]` couples `i` and `i+1`, `e[p−1] = 0`).
/// Rotations are accumulated into the columns of `z` when given.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Matrix>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let mut shift_acc = 0.0;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        let mut iter = 0;
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > EPS * tst1 {
            m += 1;
        }
        if m > l {
            loop {
                iter += 1;
                if iter > MAX_ITER_PER_VALUE {
                    return Err(Error::NoConvergence("symmetric tridiagonal QL iteration"));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                shift_acc += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        let (zi, zi1) = z.col_pair_mut(i, i + 1);
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hb = *b;
                            *b = s * *a + c * hb;
                            *a = c * *a - s * hb;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= EPS * tst1 {
                    break;
                }
            }
        }
        d[l] += shift_acc;
        e[l] = 0.0;
    }
    Ok(())
}

fn scale_of(a: &Matrix) -> f64 {
    let s = a.max_abs();
    if s == 0.0 {
        1.0
    } else {
        s
    }
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix
/// given in full storage. Only the lower triangle is read.
pub(crate) fn symmetric_eigen(a: &Matrix) -> Result<(Matrix, Vec<f64>)> {
    let p = a.rows();
    let scale = scale_of(a);
    let tri = tridiagonalize(a.scaled(1.0 / scale));
    let mut z = tri.q();
    let (mut d, mut e) = (tri.diag, tri.sub);
    tridiagonal_ql(&mut d, &mut e, Some(&mut z))?;

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
    let values = order.iter().map(|&i| d[i] * scale).collect();
    let mut vectors = Matrix::zeros(p, p);
    for (dst, &src) in order.iter().enumerate() {
        vectors.col_mut(dst).copy_from_slice(z.col(src));
    }
    Ok((vectors, values))
}

/// Eigenvalues only, descending.
pub(crate) fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    let scale = scale_of(a);
    let tri = tridiagonalize(a.scaled(1.0 / scale));
    let (mut d, mut e) = (tri.diag, tri.sub);
    tridiagonal_ql(&mut d, &mut e, None)?;
    d.sort_by(|a, b| b.total_cmp(a));
    d.iter_mut().for_each(|v| *v *= scale);
    Ok(d)
}
