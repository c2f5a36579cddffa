//! C ABI over the `c3ma` solvers.
//!
//! Every function returns a [`C3maStatus`] or a plain value and never
//! unwinds across the boundary. Solutions live behind an opaque
//! [`C3maApproximation`] handle that the caller releases with
//! [`c3ma_approximation_free`]. After a failed call,
//! [`c3ma_last_error_message`] describes the failure on the calling thread.
//!
//! Matrices cross the boundary as row-major `double` arrays. A data matrix
//! has one row per variable and one column per observation.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use c3ma::linalg::{DataMatrix, Matrix, SymmetricMatrix};
use c3ma::pipeline::{solve_covariance, solve_data, Algorithm, CovarianceApproximation, OutputForm, SolveOptions};
use c3ma::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum C3maStatus {
    Ok = 0,
    /// Bad sizes, non-finite entries, an asymmetric covariance, or an
    /// algorithm that needs the data matrix.
    InvalidArgument = 1,
    /// The bound is below 1 or not finite.
    InvalidKappa = 2,
    /// The input matrix is zero.
    InfeasibleZeroMatrix = 3,
    /// An iterative factorization did not converge.
    NoConvergence = 4,
    NullPointer = 5,
    BufferTooSmall = 6,
    /// A Rust panic was caught; this is a bug.
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum C3maAlgorithm {
    /// Eigendecomposition of the sample covariance.
    FuSpt = 0,
    /// Golub–Reinsch SVD of the scaled data matrix.
    GrSvd = 1,
    /// QR of the scaled data matrix, then SVD of the triangular factor.
    ModSvd = 2,
}

fn algorithm_from(code: i32) -> Option<Algorithm> {
    match code {
        c if c == C3maAlgorithm::FuSpt as i32 => Some(Algorithm::FuSpt),
        c if c == C3maAlgorithm::GrSvd as i32 => Some(Algorithm::GrSvd),
        c if c == C3maAlgorithm::ModSvd as i32 => Some(Algorithm::ModSvd),
        _ => None,
    }
}

fn bad_algorithm(code: i32) -> C3maStatus {
    fail(C3maStatus::InvalidArgument, format!("unknown algorithm code {code}"))
}

/// Opaque solution handle.
pub struct C3maApproximation {
    inner: CovarianceApproximation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: C3maStatus, message: impl Into<String>) -> C3maStatus {
    set_last_error(message.into());
    status
}

fn status_of(e: &Error) -> C3maStatus {
    match e {
        Error::InvalidKappa(_) => C3maStatus::InvalidKappa,
        Error::InfeasibleZeroMatrix => C3maStatus::InfeasibleZeroMatrix,
        Error::NoConvergence(_) => C3maStatus::NoConvergence,
        _ => C3maStatus::InvalidArgument,
    }
}

fn guarded(f: impl FnOnce() -> C3maStatus) -> C3maStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(C3maStatus::Internal, "internal panic"),
    }
}

/// Row-major `rows × cols` from a raw pointer.
unsafe fn read_row_major(data: *const f64, rows: usize, cols: usize) -> Option<Matrix> {
    let len = rows.checked_mul(cols)?;
    let slice = std::slice::from_raw_parts(data, len);
    Some(Matrix::from_fn(rows, cols, |i, j| slice[i * cols + j]))
}

fn finish(result: c3ma::Result<CovarianceApproximation>, out: *mut *mut C3maApproximation) -> C3maStatus {
    match result {
        Ok(inner) => {
            let handle = Box::new(C3maApproximation { inner });
            // SAFETY: `out` was checked for null by the caller.
            unsafe { *out = Box::into_raw(handle) };
            C3maStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

fn options(center: bool) -> SolveOptions {
    SolveOptions {
        output: OutputForm::Compact,
        center,
        rank_tolerance: None,
    }
}

/// Solves from a `p × n` row-major data matrix.
///
/// `algorithm` is a `C3maAlgorithm` value. On success `*out` receives a new
/// handle. GR-SVD and MOD-SVD need `p >= n`.
///
/// # Safety
/// `data` must point to `p * n` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn c3ma_solve_data(
    data: *const f64,
    p: usize,
    n: usize,
    kappa: f64,
    algorithm: i32,
    center: bool,
    out: *mut *mut C3maApproximation,
) -> C3maStatus {
    guarded(|| {
        if data.is_null() || out.is_null() {
            return fail(C3maStatus::NullPointer, "null data or output pointer");
        }
        *out = ptr::null_mut();
        let Some(m) = read_row_major(data, p, n) else {
            return fail(C3maStatus::InvalidArgument, "p * n overflows");
        };
        let x = match DataMatrix::new(m) {
            Ok(x) => x,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let Some(algorithm) = algorithm_from(algorithm) else {
            return bad_algorithm(algorithm);
        };
        finish(solve_data(&x, kappa, algorithm, &options(center)), out)
    })
}

/// Solves from a `p × p` symmetric covariance matrix. Only
/// `C3MA_ALGORITHM_FU_SPT` applies; the others report an invalid argument.
///
/// # Safety
/// `cov` must point to `p * p` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn c3ma_solve_covariance(
    cov: *const f64,
    p: usize,
    kappa: f64,
    algorithm: i32,
    out: *mut *mut C3maApproximation,
) -> C3maStatus {
    guarded(|| {
        if cov.is_null() || out.is_null() {
            return fail(C3maStatus::NullPointer, "null matrix or output pointer");
        }
        *out = ptr::null_mut();
        let Some(m) = read_row_major(cov, p, p) else {
            return fail(C3maStatus::InvalidArgument, "p * p overflows");
        };
        let s = match SymmetricMatrix::new(m) {
            Ok(s) => s,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let Some(algorithm) = algorithm_from(algorithm) else {
            return bad_algorithm(algorithm);
        };
        finish(solve_covariance(&s, kappa, algorithm, &options(false)), out)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `handle` must come from a solve function and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn c3ma_approximation_free(handle: *mut C3maApproximation) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

unsafe fn with<T>(handle: *const C3maApproximation, default: T, f: impl FnOnce(&CovarianceApproximation) -> T) -> T {
    match handle.as_ref() {
        Some(h) => f(&h.inner),
        None => default,
    }
}

/// Dimension `p`; 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn c3ma_approximation_dim(handle: *const C3maApproximation) -> usize {
    with(handle, 0, |a| a.dim())
}

/// Number of eigenvectors in the compact correction, `β* − 1`.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn c3ma_approximation_rank(handle: *const C3maApproximation) -> usize {
    with(handle, 0, |a| a.solution.correction_rank())
}

/// Lower truncation level `μ*`; NaN for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn c3ma_approximation_mu(handle: *const C3maApproximation) -> f64 {
    with(handle, f64::NAN, |a| a.solution.mu)
}

/// Upper truncation level `ν* = κ μ*`; NaN for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn c3ma_approximation_nu(handle: *const C3maApproximation) -> f64 {
    with(handle, f64::NAN, |a| a.solution.nu)
}

/// Count of eigenvalues clipped from above; 0 when the input met the bound.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn c3ma_approximation_alpha(handle: *const C3maApproximation) -> usize {
    with(handle, 0, |a| a.solution.alpha().unwrap_or(0))
}

/// Index of the first eigenvalue raised to `μ*`; `p + 1` when the input met the bound.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn c3ma_approximation_beta(handle: *const C3maApproximation) -> usize {
    with(handle, 0, |a| a.solution.beta().unwrap_or(a.dim() + 1))
}

/// Whether the input already satisfied the bound and was returned unchanged.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn c3ma_approximation_is_feasible_input(handle: *const C3maApproximation) -> bool {
    with(handle, false, |a| a.solution.is_feasible_input())
}

/// Condition number of the approximation.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn c3ma_approximation_kappa_achieved(handle: *const C3maApproximation) -> f64 {
    with(handle, f64::NAN, |a| a.kappa_achieved())
}

/// Frobenius distance to the sample covariance.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn c3ma_approximation_objective(handle: *const C3maApproximation) -> f64 {
    with(handle, f64::NAN, |a| a.objective())
}

unsafe fn fill(
    handle: *const C3maApproximation,
    out: *mut f64,
    len: usize,
    needed: impl FnOnce(&CovarianceApproximation) -> usize,
    write: impl FnOnce(&CovarianceApproximation, &mut [f64]),
) -> C3maStatus {
    guarded(|| {
        let Some(h) = handle.as_ref() else {
            return fail(C3maStatus::NullPointer, "null handle");
        };
        if out.is_null() {
            return fail(C3maStatus::NullPointer, "null output buffer");
        }
        let need = needed(&h.inner);
        if len < need {
            return fail(
                C3maStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {need}"),
            );
        }
        write(&h.inner, std::slice::from_raw_parts_mut(out, need));
        C3maStatus::Ok
    })
}

/// Copies the `p` eigenvalues of the approximation, descending.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn c3ma_approximation_eigenvalues(
    handle: *const C3maApproximation,
    out: *mut f64,
    len: usize,
) -> C3maStatus {
    fill(
        handle,
        out,
        len,
        |a| a.dim(),
        |a, buf| buf.copy_from_slice(&a.solution.lambda_star),
    )
}

/// Writes the dense `p × p` approximation, row-major.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn c3ma_approximation_dense(
    handle: *const C3maApproximation,
    out: *mut f64,
    len: usize,
) -> C3maStatus {
    fill(
        handle,
        out,
        len,
        |a| a.dim() * a.dim(),
        |a, buf| {
            let dense = a.to_dense();
            let p = a.dim();
            // symmetric, so column-major storage is also row-major
            buf.copy_from_slice(&dense.as_matrix().as_slice()[..p * p]);
        },
    )
}

/// Writes the `p × k` eigenvectors of the compact correction, one vector
/// after another (`k = c3ma_approximation_rank`).
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn c3ma_approximation_vectors(
    handle: *const C3maApproximation,
    out: *mut f64,
    len: usize,
) -> C3maStatus {
    fill(
        handle,
        out,
        len,
        |a| a.dim() * a.solution.correction_rank(),
        |a, buf| match a.compact() {
            Some(c) => buf.copy_from_slice(c.columns.as_slice()),
            None => buf.fill(0.0),
        },
    )
}

/// Writes the `k` coefficients `λ*ᵢ − μ*` of the compact correction.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn c3ma_approximation_deltas(
    handle: *const C3maApproximation,
    out: *mut f64,
    len: usize,
) -> C3maStatus {
    fill(
        handle,
        out,
        len,
        |a| a.solution.correction_rank(),
        |a, buf| {
            let mu = a.solution.mu;
            for (b, l) in buf.iter_mut().zip(&a.solution.lambda_star) {
                *b = l - mu;
            }
        },
    )
}

/// Message for the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn c3ma_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn c3ma_status_string(status: C3maStatus) -> *const c_char {
    let s: &'static CStr = match status {
        C3maStatus::Ok => c"ok",
        C3maStatus::InvalidArgument => c"invalid argument",
        C3maStatus::InvalidKappa => c"condition number bound must be finite and at least 1",
        C3maStatus::InfeasibleZeroMatrix => c"input matrix is zero",
        C3maStatus::NoConvergence => c"factorization did not converge",
        C3maStatus::NullPointer => c"null pointer",
        C3maStatus::BufferTooSmall => c"output buffer too small",
        C3maStatus::Internal => c"internal error",
    };
    s.as_ptr()
}
