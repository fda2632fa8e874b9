#ifndef MAXBOUND_H
#define MAXBOUND_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum MbStatus {
  MB_STATUS_OK = 0,
  MB_STATUS_DOMAIN = 1,
  MB_STATUS_VALIDITY = 2,
  MB_STATUS_NOT_POSITIVE_DEFINITE = 3,
  MB_STATUS_NUMERIC = 4,
  MB_STATUS_RESOURCE = 5,
  MB_STATUS_PARSE = 6,
  MB_STATUS_IO = 7,
  MB_STATUS_NULL_POINTER = 8,
  MB_STATUS_PANIC = 9,
} MbStatus;

/**
 * Opaque validated covariance matrix.
 */
typedef struct MbCovariance MbCovariance;

/**
 * Opaque stationary process in moving-average form.
 */
typedef struct MbWoldModel MbWoldModel;

/**
 * Lower-bound certificate: `Pr{M_n >= threshold} >= guaranteed_tail`.
 */
typedef struct MbCertificate {
  uint64_t n;
  double alpha;
  double l_alpha;
  double sigma;
  double tau;
  double threshold;
  double guaranteed_tail;
} MbCertificate;

/**
 * Bracket on `M_n^2`; `msq_lower` is NaN for one-sided brackets.
 */
typedef struct MbBracket {
  double coupling_value;
  double msq_lower;
  double msq_upper;
  bool regime_ok;
} MbBracket;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the length the full message
 * needs including the terminator; `buf` may be null to query it.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t mb_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mb_version(void);

/**
 * Standard normal CDF.
 *
 * # Safety
 * `out` must be null or valid for writing one `double`.
 */
enum MbStatus mb_std_normal_cdf(double x, double *out);

/**
 * Upper tail `1 - Phi(x)`.
 *
 * # Safety
 * `out` must be null or valid for writing one `double`.
 */
enum MbStatus mb_std_normal_tail(double x, double *out);

/**
 * `ln(1 - Phi(x))`, accurate far into the tail.
 *
 * # Safety
 * `out` must be null or valid for writing one `double`.
 */
enum MbStatus mb_std_normal_log_tail(double x, double *out);

/**
 * `Phi^{-1}(p)` for `p` in (0, 1).
 *
 * # Safety
 * `out` must be null or valid for writing one `double`.
 */
enum MbStatus mb_std_normal_quantile(double p, double *out);

/**
 * `V = -2 ln(1 - Phi(x)) - ln(2 pi)`.
 *
 * # Safety
 * `out` must be null or valid for writing one `double`.
 */
enum MbStatus mb_tail_v(double x, double *out);

/**
 * `V - ln V`, a lower bound on `x^2` for `x >= 2`.
 *
 * # Safety
 * `out` must be null or valid for writing one `double`.
 */
enum MbStatus mb_invert_v_lower(double v, double *out);

/**
 * `V - ln V + ln V / V`, an upper bound on `x^2` for `x >= 1`.
 *
 * # Safety
 * `out` must be null or valid for writing one `double`.
 */
enum MbStatus mb_invert_v_upper(double v, double *out);

/**
 * # Safety
 * `out` must be null or valid for writing one `MbCertificate`.
 */
enum MbStatus mb_lower_bound_certificate(uint64_t n,
                                         double alpha,
                                         double sigma,
                                         double tau,
                                         struct MbCertificate *out);

/**
 * Certificate at `alpha = 1/4` with `sigma = sqrt(lambda_min)`,
 * `tau = sqrt(lambda_max)`.
 *
 * # Safety
 * `out` must be null or valid for writing one `MbCertificate`.
 */
enum MbStatus mb_headline_bound(uint64_t n,
                                double lambda_min,
                                double lambda_max,
                                struct MbCertificate *out);

/**
 * Two-sided bracket for `n` independent unit Gaussians at Gumbel value `g`.
 *
 * # Safety
 * `out` must be null or valid for writing one `MbBracket`.
 */
enum MbStatus mb_independent_msq_bracket(uint64_t n, double g, struct MbBracket *out);

/**
 * Upper bound on `M_n^2` under any dependence at exponential value `e`.
 *
 * # Safety
 * `out` must be null or valid for writing one `MbBracket`.
 */
enum MbStatus mb_dependent_msq_bracket(uint64_t n, double e, struct MbBracket *out);

/**
 * Validates a row-major `dim x dim` matrix and returns a handle in `out`.
 *
 * # Safety
 * `entries` must be valid for `dim * dim` reads; `out` for one write.
 */
enum MbStatus mb_covariance_new(const double *entries, size_t dim, struct MbCovariance **out);

/**
 * Releases a handle from [`mb_covariance_new`]; null is ignored.
 *
 * # Safety
 * `c` must be null or a live handle not used afterwards.
 */
void mb_covariance_free(struct MbCovariance *c);

/**
 * Dimension of the matrix, 0 for a null handle.
 *
 * # Safety
 * `c` must be null or a live handle.
 */
size_t mb_covariance_dim(const struct MbCovariance *c);

/**
 * `(min sigma_i, max tau_i)` of the sequential decomposition under
 * `ordering` (a permutation of `0..dim`); a null `ordering` means natural
 * order.
 *
 * # Safety
 * `c` must be a live handle, `ordering` null or valid for `ordering_len`
 * reads, and the outputs valid for one write each.
 */
enum MbStatus mb_covariance_sigma_tau(const struct MbCovariance *c,
                                      const size_t *ordering,
                                      size_t ordering_len,
                                      double *sigma,
                                      double *tau);

/**
 * Smallest and largest eigenvalues.
 *
 * # Safety
 * `c` must be a live handle and the outputs valid for one write each.
 */
enum MbStatus mb_covariance_eigen_bounds(const struct MbCovariance *c,
                                         double *lambda_min,
                                         double *lambda_max);

/**
 * AR(1) with unit marginal variance, truncated once the neglected
 * variance drops below `tail_tol`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum MbStatus mb_wold_ar1(double rho, double tail_tol, struct MbWoldModel **out);

/**
 * Finite moving average `X_i = s (Z_i + sum_j psi_j Z_{i-j})`, scaled to
 * unit variance.
 *
 * # Safety
 * `psi` must be null (with `len == 0`) or valid for `len` reads; `out` for
 * one write.
 */
enum MbStatus mb_wold_from_psi(const double *psi, size_t len, struct MbWoldModel **out);

/**
 * Releases a process handle; null is ignored.
 *
 * # Safety
 * `m` must be null or a live handle not used afterwards.
 */
void mb_wold_free(struct MbWoldModel *m);

/**
 * Subsampled lower bound for `n` consecutive values at stride `k`;
 * `subsample_count` may be null.
 *
 * # Safety
 * `m` must be a live handle, `out` valid for one write and
 * `subsample_count` null or valid for one write.
 */
enum MbStatus mb_stationary_lower_bound(const struct MbWoldModel *m,
                                        uint64_t n,
                                        uint64_t k,
                                        double alpha,
                                        struct MbCertificate *out,
                                        uint64_t *subsample_count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAXBOUND_H */
