use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Dense real matrix in column-major order.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        if rows.iter().any(|row| row.as_ref().len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Matrix::from_fn(r, c, |i, j| rows[i].as_ref()[j]))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Mutable access to two distinct columns at once.
    pub fn col_pair_mut(&mut self, a: usize, b: usize) -> (&mut [f64], &mut [f64]) {
        assert_ne!(a, b);
        let r = self.rows;
        if a < b {
            let (lo, hi) = self.data.split_at_mut(b * r);
            (&mut lo[a * r..(a + 1) * r], &mut hi[..r])
        } else {
            let (lo, hi) = self.data.split_at_mut(a * r);
            (&mut hi[..r], &mut lo[b * r..(b + 1) * r])
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Leading `k` columns as a new matrix.
    pub fn leading_columns(&self, k: usize) -> Matrix {
        assert!(k <= self.cols);
        Matrix {
            rows: self.rows,
            cols: k,
            data: self.data[..k * self.rows].to_vec(),
        }
    }

    pub fn scale_mut(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn scaled(&self, factor: f64) -> Matrix {
        let mut m = self.clone();
        m.scale_mut(factor);
        m
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in rhs.col(j).iter().enumerate() {
                if b != 0.0 {
                    axpy(b, self.col(k), dst);
                }
            }
        }
        out
    }

    /// `selfᵀ * rhs`.
    pub fn t_matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.rows, rhs.rows, "row counts differ");
        Matrix::from_fn(self.cols, rhs.cols, |i, j| dot(self.col(i), rhs.col(j)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `max |(selfᵀ self − I)_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.t_matmul(self);
        let mut worst = 0.0_f64;
        for j in 0..g.cols {
            for i in 0..g.rows {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>12.6e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Inner product with eight independent partial sums so the reduction
/// vectorizes; the summation order is fixed, so results are reproducible.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0_f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub(crate) fn norm2(x: &[f64]) -> f64 {
    // scaled to avoid overflow for large entries
    let scale = x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let inv = 1.0 / scale;
    scale * x.iter().map(|v| (v * inv) * (v * inv)).sum::<f64>().sqrt()
}

/// A p×n observation matrix; columns are observations, rows are variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(Matrix);

impl DataMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.rows == 0 || matrix.cols == 0 {
            return Err(Error::InvalidInput(format!(
                "data matrix must be at least 1x1, got {}x{}",
                matrix.rows, matrix.cols
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidInput("data matrix has non-finite entries".into()));
        }
        Ok(DataMatrix(matrix))
    }

    /// Number of variables.
    pub fn p(&self) -> usize {
        self.0.rows
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.0.cols
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// Subtracts each variable's sample mean.
    pub fn centered(&self) -> DataMatrix {
        let mut m = self.0.clone();
        let n = m.cols as f64;
        for i in 0..m.rows {
            let mean = (0..m.cols).map(|j| m[(i, j)]).sum::<f64>() / n;
            for j in 0..m.cols {
                m[(i, j)] -= mean;
            }
        }
        DataMatrix(m)
    }
}

/// A symmetric p×p matrix, stored in full with exactly mirrored entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(Matrix);

/// Relative asymmetry accepted by [`SymmetricMatrix::new`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

impl SymmetricMatrix {
    /// Validates symmetry (relative to the largest entry) and mirrors the
    /// average of `S_ij` and `S_ji` into both positions.
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.rows != matrix.cols {
            return Err(Error::Shape(format!(
                "symmetric matrix must be square, got {}x{}",
                matrix.rows, matrix.cols
            )));
        }
        if matrix.rows == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let tol = SYMMETRY_TOLERANCE * matrix.max_abs();
        let p = matrix.rows;
        let mut m = matrix;
        for j in 0..p {
            for i in j + 1..p {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if (a - b).abs() > tol {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric: entries ({i},{j}) and ({j},{i}) differ by {:e}",
                        (a - b).abs()
                    )));
                }
                let avg = 0.5 * (a + b);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        Ok(SymmetricMatrix(m))
    }

    /// Builds from the lower triangle; `f(i, j)` is only called with `i >= j`.
    pub fn from_lower_fn(p: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(p, p);
        for j in 0..p {
            for i in j..p {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymmetricMatrix(m)
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix) -> Self {
        debug_assert_eq!(m.rows, m.cols);
        SymmetricMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.data.iter().all(|&v| v == 0.0)
    }
}

impl Index<(usize, usize)> for SymmetricMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Orthonormal factor together with descending eigenvalues or singular values.
///
/// `vectors` is p×k; `k == full_dimension` for a full eigendecomposition and
/// `k == min(p, n)` for a thin SVD.
#[derive(Debug, Clone)]
pub struct SpectralForm {
    pub vectors: Matrix,
    pub values: Vec<f64>,
    pub full_dimension: usize,
}

impl SpectralForm {
    /// `V diag(values) Vᵀ`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        SymmetricMatrix(weighted_gram(&self.vectors, &self.values))
    }
}

/// `Σ_k w_k u_k u_kᵀ` over the columns of `u`, built on the lower triangle
/// four terms at a time and mirrored.
pub(crate) fn weighted_gram(u: &Matrix, w: &[f64]) -> Matrix {
    let (p, k) = (u.rows, u.cols);
    assert_eq!(w.len(), k);
    let terms: Vec<usize> = (0..k).filter(|&l| w[l] != 0.0).collect();
    // coef[(t, j)] = w_t u_t[j], contiguous per output column j
    let mut coef = Matrix::zeros(terms.len(), p);
    for (t, &l) in terms.iter().enumerate() {
        for (j, &x) in u.col(l).iter().enumerate() {
            coef[(t, j)] = w[l] * x;
        }
    }
    let mut out = Matrix::zeros(p, p);
    for j in 0..p {
        let c = coef.col(j);
        let dst = &mut out.col_mut(j)[j..];
        let mut t = 0;
        while t + 4 <= terms.len() {
            let (c0, c1, c2, c3) = (c[t], c[t + 1], c[t + 2], c[t + 3]);
            let (u0, u1) = (&u.col(terms[t])[j..], &u.col(terms[t + 1])[j..]);
            let (u2, u3) = (&u.col(terms[t + 2])[j..], &u.col(terms[t + 3])[j..]);
            for (i, d) in dst.iter_mut().enumerate() {
                *d += c0 * u0[i] + c1 * u1[i] + c2 * u2[i] + c3 * u3[i];
            }
            t += 4;
        }
        for tt in t..terms.len() {
            axpy(c[tt], &u.col(terms[tt])[j..], dst);
        }
    }
    mirror_lower(&mut out);
    out
}

/// Copies the strict lower triangle onto the upper one.
pub(crate) fn mirror_lower(m: &mut Matrix) {
    let p = m.rows;
    for j in 0..p {
        for i in j + 1..p {
            m[(j, i)] = m[(i, j)];
        }
    }
}

/// Flips each column so that its largest-magnitude entry is positive.
pub(crate) fn canonicalize_signs(m: &mut Matrix) {
    for j in 0..m.cols {
        let col = m.col_mut(j);
        let mut best = 0.0_f64;
        let mut sign = 1.0;
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            col.iter_mut().for_each(|v| *v = -*v);
        }
    }
}
