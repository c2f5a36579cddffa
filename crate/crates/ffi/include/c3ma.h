#ifndef C3MA_H
#define C3MA_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum C3maStatus {
  C3MA_STATUS_OK = 0,
  // Bad sizes, non-finite entries, an asymmetric covariance, or an
  // algorithm that needs the data matrix.
  C3MA_STATUS_INVALID_ARGUMENT = 1,
  // The bound is below 1 or not finite.
  C3MA_STATUS_INVALID_KAPPA = 2,
  // The input matrix is zero.
  C3MA_STATUS_INFEASIBLE_ZERO_MATRIX = 3,
  // An iterative factorization did not converge.
  C3MA_STATUS_NO_CONVERGENCE = 4,
  C3MA_STATUS_NULL_POINTER = 5,
  C3MA_STATUS_BUFFER_TOO_SMALL = 6,
  // A Rust panic was caught; this is a bug.
  C3MA_STATUS_INTERNAL = 7,
} C3maStatus;

typedef enum C3maAlgorithm {
  // Eigendecomposition of the sample covariance.
  C3MA_ALGORITHM_FU_SPT = 0,
  // Golub–Reinsch SVD of the scaled data matrix.
  C3MA_ALGORITHM_GR_SVD = 1,
  // QR of the scaled data matrix, then SVD of the triangular factor.
  C3MA_ALGORITHM_MOD_SVD = 2,
} C3maAlgorithm;

// Opaque solution handle.
typedef struct C3maApproximation C3maApproximation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Solves from a `p × n` row-major data matrix.
//
// `algorithm` is a `C3maAlgorithm` value. On success `*out` receives a new
// handle. GR-SVD and MOD-SVD need `p >= n`.
//
// # Safety
// `data` must point to `p * n` readable doubles and `out` must be writable.
enum C3maStatus c3ma_solve_data(const double *data,
                                size_t p,
                                size_t n,
                                double kappa,
                                int32_t algorithm,
                                bool center,
                                struct C3maApproximation **out);

// Solves from a `p × p` symmetric covariance matrix. Only
// `C3MA_ALGORITHM_FU_SPT` applies; the others report an invalid argument.
//
// # Safety
// `cov` must point to `p * p` readable doubles and `out` must be writable.
enum C3maStatus c3ma_solve_covariance(const double *cov,
                                      size_t p,
                                      double kappa,
                                      int32_t algorithm,
                                      struct C3maApproximation **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `handle` must come from a solve function and not have been freed.
void c3ma_approximation_free(struct C3maApproximation *handle);

// Dimension `p`; 0 for a null handle.
//
// # Safety
// `handle` must be null or a live handle.
size_t c3ma_approximation_dim(const struct C3maApproximation *handle);

// Number of eigenvectors in the compact correction, `β* − 1`.
//
// # Safety
// `handle` must be null or a live handle.
size_t c3ma_approximation_rank(const struct C3maApproximation *handle);

// Lower truncation level `μ*`; NaN for a null handle.
//
// # Safety
// `handle` must be null or a live handle.
double c3ma_approximation_mu(const struct C3maApproximation *handle);

// Upper truncation level `ν* = κ μ*`; NaN for a null handle.
//
// # Safety
// `handle` must be null or a live handle.
double c3ma_approximation_nu(const struct C3maApproximation *handle);

// Count of eigenvalues clipped from above; 0 when the input met the bound.
//
// # Safety
// `handle` must be null or a live handle.
size_t c3ma_approximation_alpha(const struct C3maApproximation *handle);

// Index of the first eigenvalue raised to `μ*`; `p + 1` when the input met the bound.
//
// # Safety
// `handle` must be null or a live handle.
size_t c3ma_approximation_beta(const struct C3maApproximation *handle);

// Whether the input already satisfied the bound and was returned unchanged.
//
// # Safety
// `handle` must be null or a live handle.
bool c3ma_approximation_is_feasible_input(const struct C3maApproximation *handle);

// Condition number of the approximation.
//
// # Safety
// `handle` must be null or a live handle.
double c3ma_approximation_kappa_achieved(const struct C3maApproximation *handle);

// Frobenius distance to the sample covariance.
//
// # Safety
// `handle` must be null or a live handle.
double c3ma_approximation_objective(const struct C3maApproximation *handle);

// Copies the `p` eigenvalues of the approximation, descending.
//
// # Safety
// `out` must point to `len` writable doubles.
enum C3maStatus c3ma_approximation_eigenvalues(const struct C3maApproximation *handle,
                                               double *out,
                                               size_t len);

// Writes the dense `p × p` approximation, row-major.
//
// # Safety
// `out` must point to `len` writable doubles.
enum C3maStatus c3ma_approximation_dense(const struct C3maApproximation *handle,
                                         double *out,
                                         size_t len);

// Writes the `p × k` eigenvectors of the compact correction, one vector
// after another (`k = c3ma_approximation_rank`).
//
// # Safety
// `out` must point to `len` writable doubles.
enum C3maStatus c3ma_approximation_vectors(const struct C3maApproximation *handle,
                                           double *out,
                                           size_t len);

// Writes the `k` coefficients `λ*ᵢ − μ*` of the compact correction.
//
// # Safety
// `out` must point to `len` writable doubles.
enum C3maStatus c3ma_approximation_deltas(const struct C3maApproximation *handle,
                                          double *out,
                                          size_t len);

// Message for the last failure on this thread, or null. Valid until the
// next failing call on the same thread.
const char *c3ma_last_error_message(void);

// Static description of a status code.
const char *c3ma_status_string(enum C3maStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* C3MA_H */
