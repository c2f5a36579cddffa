//! Dense containers and the three factorizations feeding the solvers:
//! full symmetric eigendecomposition, Golub–Reinsch thin SVD, and the
//! QR-then-SVD composition for tall matrices.

mod eigen;
mod householder;
mod matrix;
mod svd;

pub use householder::HouseholderQr;
pub use matrix::{DataMatrix, Matrix, SpectralForm, SymmetricMatrix, SYMMETRY_TOLERANCE};

pub(crate) use matrix::{canonicalize_signs, weighted_gram};

use crate::error::{Error, Result};

/// Full eigendecomposition `S = V diag(λ) Vᵀ`, eigenvalues descending.
///
/// Each eigenvector is signed so that its largest-magnitude entry is positive.
pub fn symmetric_eigendecomposition(s: &SymmetricMatrix) -> Result<SpectralForm> {
    let (mut vectors, values) = eigen::symmetric_eigen(s.as_matrix())?;
    canonicalize_signs(&mut vectors);
    Ok(SpectralForm {
        vectors,
        values,
        full_dimension: s.dim(),
    })
}

/// Eigenvalues of `S`, descending, without eigenvectors.
pub fn symmetric_eigenvalues(s: &SymmetricMatrix) -> Result<Vec<f64>> {
    eigen::symmetric_eigenvalues(s.as_matrix())
}

fn require_tall(a: &DataMatrix, what: &str) -> Result<()> {
    if a.p() < a.n() {
        return Err(Error::Shape(format!(
            "{what} needs p >= n, got p = {}, n = {}",
            a.p(),
            a.n()
        )));
    }
    Ok(())
}

/// Thin SVD of a tall matrix by Golub–Reinsch applied directly to `A`.
///
/// Returns the p×n left factor with the singular values (descending, ≥ 0)
/// as its `values`. The right factor is not computed.
pub fn thin_svd(a: &DataMatrix) -> Result<SpectralForm> {
    require_tall(a, "thin SVD")?;
    let (mut vectors, values) = svd::golub_reinsch(a.as_matrix())?;
    canonicalize_signs(&mut vectors);
    Ok(SpectralForm {
        vectors,
        values,
        full_dimension: a.p(),
    })
}

/// Result of [`mod_svd`]: the left singular factor plus the implicit `Q`.
#[derive(Debug, Clone)]
pub struct ModSvd {
    /// `Q[:, ..n] U₁` with the singular values of `A`.
    pub left: SpectralForm,
    /// Householder reflectors of `A = Q [R; 0]`.
    pub q_factor: HouseholderQr,
}

/// Chan's modified SVD: `A = Q [R; 0]`, then `R = U₁ diag(δ) Vᵀ` by
/// Golub–Reinsch on the n×n factor, then the left factor `Q [U₁; 0]`.
///
/// `Q` is applied through its reflectors; the p×p matrix is never formed.
pub fn mod_svd(a: &DataMatrix) -> Result<ModSvd> {
    require_tall(a, "MOD-SVD")?;
    let qr = HouseholderQr::new(a.as_matrix())?;
    let (u1, values) = svd::golub_reinsch(&qr.r())?;
    let mut vectors = qr.apply_q_to_leading(&u1);
    canonicalize_signs(&mut vectors);
    Ok(ModSvd {
        left: SpectralForm {
            vectors,
            values,
            full_dimension: a.p(),
        },
        q_factor: qr,
    })
}

/// `(1/n) X Xᵀ`, accumulated on the lower triangle and mirrored.
pub fn gram_scaled(x: &Matrix) -> SymmetricMatrix {
    let w = vec![1.0 / x.cols() as f64; x.cols()];
    SymmetricMatrix::from_matrix_unchecked(weighted_gram(x, &w))
}
