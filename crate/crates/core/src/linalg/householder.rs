//! Householder reflectors and the QR factorization built from them.
//!
//! A reflector is `H = I − τ v vᵀ` with `v[0] = 1` implied; the remaining
//! entries of `v` are stored in place of the entries they annihilate.

use super::matrix::{axpy, dot, norm2, Matrix};
use crate::error::{Error, Result};

/// Turns `x = [α, x₁…]` into the reflector that maps it onto `β e₁`.
///
/// On return `x[1..]` holds the tail of `v` and `x[0]` holds `β`.
/// Returns `τ` (zero when no reflection is needed).
pub(crate) fn make_reflector(x: &mut [f64]) -> f64 {
    let (head, tail) = x.split_first_mut().expect("empty reflector");
    let tail_norm = norm2(tail);
    if tail_norm == 0.0 {
        return 0.0;
    }
    let alpha = *head;
    let beta = -alpha.signum() * alpha.hypot(tail_norm);
    let beta = if alpha == 0.0 { -tail_norm } else { beta };
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    tail.iter_mut().for_each(|v| *v *= scale);
    *head = beta;
    tau
}

/// Applies `H = I − τ v vᵀ` (with `v = [1, tail]`) to `y` in place.
#[inline]
pub(crate) fn apply_reflector(tail: &[f64], tau: f64, y: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let (y0, rest) = y.split_first_mut().unwrap();
    let s = tau * (*y0 + dot(tail, rest));
    *y0 -= s;
    axpy(-s, tail, rest);
}

/// Applies `H = I − τ v vᵀ` to rows `row0..row0+1+tail.len()` of every column in
/// `cols` of the column-major buffer `data` (leading dimension `ld`).
pub(crate) fn reflect_columns(
    tail: &[f64],
    tau: f64,
    data: &mut [f64],
    ld: usize,
    row0: usize,
    cols: std::ops::Range<usize>,
) {
    if tau == 0.0 || cols.is_empty() {
        return;
    }
    let len = tail.len() + 1;
    let mut it = data[cols.start * ld..cols.end * ld]
        .chunks_exact_mut(ld)
        .map(|c| &mut c[row0..row0 + len]);
    loop {
        match (it.next(), it.next(), it.next(), it.next()) {
            (Some(a), Some(b), Some(c), Some(d)) => reflect4(tail, tau, [a, b, c, d]),
            (a, b, c, _) => {
                for y in [a, b, c].into_iter().flatten() {
                    apply_reflector(tail, tau, y);
                }
                return;
            }
        }
    }
}

fn reflect4(tail: &[f64], tau: f64, ys: [&mut [f64]; 4]) {
    let [y0, y1, y2, y3] = ys;
    let mut acc = [[0.0_f64; 4]; 4];
    let m4 = tail.len() / 4 * 4;
    for r in (0..m4).step_by(4) {
        let t = &tail[r..r + 4];
        for (acc_l, y) in acc.iter_mut().zip([&*y0, &*y1, &*y2, &*y3]) {
            let y = &y[r + 1..r + 5];
            for q in 0..4 {
                acc_l[q] += t[q] * y[q];
            }
        }
    }
    let mut s = [0.0; 4];
    for (l, y) in [&*y0, &*y1, &*y2, &*y3].into_iter().enumerate() {
        let rest: f64 = (m4..tail.len()).map(|r| tail[r] * y[r + 1]).sum();
        let a = &acc[l];
        s[l] = tau * (y[0] + ((a[0] + a[2]) + (a[1] + a[3])) + rest);
    }
    y0[0] -= s[0];
    y1[0] -= s[1];
    y2[0] -= s[2];
    y3[0] -= s[3];
    let (z0, z1, z2, z3) = (&mut y0[1..], &mut y1[1..], &mut y2[1..], &mut y3[1..]);
    for (r, &t) in tail.iter().enumerate() {
        z0[r] -= s[0] * t;
        z1[r] -= s[1] * t;
        z2[r] -= s[2] * t;
        z3[r] -= s[3] * t;
    }
}

/// `A = Q [R; 0]` for a tall `p×n` matrix, with `Q` kept as `n` reflectors.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    /// R in the upper triangle, reflector tails below the diagonal.
    factors: Matrix,
    tau: Vec<f64>,
}

impl HouseholderQr {
    pub fn new(a: &Matrix) -> Result<Self> {
        let (p, n) = (a.rows(), a.cols());
        if p < n {
            return Err(Error::Shape(format!(
                "QR factorization needs rows >= cols, got {p}x{n}"
            )));
        }
        let mut f = a.clone();
        let mut tau = Vec::with_capacity(n);
        for k in 0..n {
            let t = make_reflector(&mut f.col_mut(k)[k..]);
            tau.push(t);
            if t != 0.0 {
                let (head, rest) = f.as_mut_slice().split_at_mut((k + 1) * p);
                let v = &head[k * p + k + 1..];
                reflect_columns(v, t, rest, p, k, 0..n - k - 1);
            }
        }
        Ok(HouseholderQr { factors: f, tau })
    }

    pub fn rows(&self) -> usize {
        self.factors.rows()
    }

    pub fn cols(&self) -> usize {
        self.factors.cols()
    }

    /// The upper-triangular `n×n` factor.
    pub fn r(&self) -> Matrix {
        let n = self.cols();
        Matrix::from_fn(n, n, |i, j| if i <= j { self.factors[(i, j)] } else { 0.0 })
    }

    fn reflector_tail(&self, k: usize) -> &[f64] {
        &self.factors.col(k)[k + 1..]
    }

    /// `v ← Q v` for a length-p vector.
    pub fn apply_q(&self, v: &mut [f64]) {
        assert_eq!(v.len(), self.rows());
        for k in (0..self.cols()).rev() {
            apply_reflector(self.reflector_tail(k), self.tau[k], &mut v[k..]);
        }
    }

    /// `v ← Qᵀ v` for a length-p vector.
    pub fn apply_qt(&self, v: &mut [f64]) {
        assert_eq!(v.len(), self.rows());
        for k in 0..self.cols() {
            apply_reflector(self.reflector_tail(k), self.tau[k], &mut v[k..]);
        }
    }

    /// `Q [B; 0]` for an `n×k` block `B`, i.e. the first n columns of Q times B,
    /// computed without forming Q.
    pub fn apply_q_to_leading(&self, b: &Matrix) -> Matrix {
        let (p, n) = (self.rows(), self.cols());
        assert_eq!(b.rows(), n);
        let mut out = Matrix::zeros(p, b.cols());
        for j in 0..b.cols() {
            out.col_mut(j)[..n].copy_from_slice(b.col(j));
        }
        for k in (0..n).rev() {
            reflect_columns(
                self.reflector_tail(k),
                self.tau[k],
                out.as_mut_slice(),
                p,
                k,
                0..b.cols(),
            );
        }
        out
    }

    /// Explicit p×p orthogonal factor.
    pub fn q_full(&self) -> Matrix {
        let (p, n) = (self.rows(), self.cols());
        let mut q = Matrix::identity(p);
        for k in (0..n).rev() {
            reflect_columns(self.reflector_tail(k), self.tau[k], q.as_mut_slice(), p, k, k..p);
        }
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(p: usize, n: usize) -> Matrix {
        Matrix::from_fn(p, n, |i, j| ((i * 7 + j * 13) % 11) as f64 - 5.0 + 0.1 * (i as f64))
    }

    #[test]
    fn reflector_maps_onto_axis() {
        let x = [3.0, 4.0, 0.0, 12.0];
        let mut work = x;
        let tau = make_reflector(&mut work);
        assert!((work[0].abs() - 13.0).abs() < 1e-12);
        let mut y = x;
        apply_reflector(&work[1..], tau, &mut y);
        assert!((y[0] - work[0]).abs() < 1e-12);
        assert!(y[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn zero_tail_needs_no_reflection() {
        let mut x = [-2.0, 0.0, 0.0];
        assert_eq!(make_reflector(&mut x), 0.0);
        assert_eq!(x[0], -2.0);
    }

    #[test]
    fn qr_reconstructs_and_q_is_orthogonal() {
        let a = sample(9, 4);
        let qr = HouseholderQr::new(&a).unwrap();
        let q = qr.q_full();
        assert!(q.orthonormality_defect() < 1e-13);
        let mut rz = Matrix::zeros(9, 4);
        let r = qr.r();
        for j in 0..4 {
            for i in 0..4 {
                rz[(i, j)] = r[(i, j)];
            }
        }
        let back = q.matmul(&rz);
        assert!(back.sub(&a).frobenius_norm() < 1e-12 * a.frobenius_norm());
        let lead = qr.apply_q_to_leading(&r);
        assert!(lead.sub(&a).frobenius_norm() < 1e-12 * a.frobenius_norm());
    }

    #[test]
    fn q_and_qt_are_inverse() {
        let qr = HouseholderQr::new(&sample(6, 3)).unwrap();
        let v0: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let mut v = v0.clone();
        qr.apply_qt(&mut v);
        qr.apply_q(&mut v);
        for (a, b) in v.iter().zip(&v0) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn wide_matrix_is_rejected() {
        assert!(matches!(HouseholderQr::new(&Matrix::zeros(2, 3)), Err(Error::Shape(_))));
    }
}
