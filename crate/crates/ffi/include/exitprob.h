#ifndef EXITPROB_H
#define EXITPROB_H

/* Generated by cbindgen from the exitprob-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum ExitprobStatus {
  ExitprobStatus_Ok = 0,
  ExitprobStatus_NullArgument = 1,
  ExitprobStatus_InvalidUtf8 = 2,
  ExitprobStatus_SyntaxError = 3,
  ExitprobStatus_DomainError = 4,
  ExitprobStatus_RateError = 5,
  ExitprobStatus_ConfigError = 6,
  ExitprobStatus_HypothesisError = 7,
  ExitprobStatus_DegenerateError = 8,
  ExitprobStatus_InternalError = 9,
} ExitprobStatus;

// Integral-test verdicts as stable integers.
typedef enum ExitprobVerdict {
  ExitprobVerdict_Convergent = 0,
  ExitprobVerdict_Divergent = 1,
  ExitprobVerdict_Inconclusive = 2,
} ExitprobVerdict;

// Opaque boundary handle.
typedef struct ExitprobBoundary ExitprobBoundary;

// Simulation parameters (mirrors the library configuration).
typedef struct ExitprobSimConfig {
  uint64_t n_paths;
  uint64_t n_steps;
  double t_horizon;
  uint64_t seed;
  // Nonzero enables the within-step bridge crossing correction.
  uint8_t bridge_correction;
  uint64_t chunk_size;
} ExitprobSimConfig;

// Monte Carlo exit estimate.
typedef struct ExitprobEstimate {
  double p_hat;
  double std_err;
  uint64_t n_paths;
  // NaN for the direct estimator.
  double effective_sample_size;
  // Nonzero when produced by the Girsanov-weighted estimator.
  uint8_t is_girsanov;
} ExitprobEstimate;

// Survival lower-bound evaluation.
typedef struct ExitprobBound {
  double base_probability;
  double half_int_fprime_sq;
  double int_fpp_sqrt;
  double sqrt_t_fprime_t;
  double lower_bound;
} ExitprobBound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *exitprob_version(void);

// Message for the most recent failure on this thread. Valid until the next
// library call on the same thread; never NULL.
const char *exitprob_last_error_message(void);

// Parse a boundary expression into a new handle.
//
// # Safety
// `expr` must be a valid NUL-terminated string and `out` a valid pointer.
// The returned handle must be released with [`exitprob_boundary_free`].
enum ExitprobStatus exitprob_boundary_parse(const char *expr, struct ExitprobBoundary **out);

// Release a boundary handle. NULL is ignored.
//
// # Safety
// `b` must be a handle from [`exitprob_boundary_parse`], not yet freed.
void exitprob_boundary_free(struct ExitprobBoundary *b);

// Evaluate `f`, `f'`, or `f''` (order 0, 1, 2) at `t >= 0`.
//
// # Safety
// `b` must be a live handle and `out` a valid pointer.
enum ExitprobStatus exitprob_boundary_eval(const struct ExitprobBoundary *b,
                                           double t,
                                           uint32_t order,
                                           double *out);

// Integral test: verdict plus the tail-extrapolated value.
//
// # Safety
// `b` must be a live handle; `out_verdict` and `out_value` valid pointers.
enum ExitprobStatus exitprob_integral_test(const struct ExitprobBoundary *b,
                                           double tolerance,
                                           enum ExitprobVerdict *out_verdict,
                                           double *out_value);

// The three lower-bound exponent integrals, written to `out[0..3]`:
// `int f'^2`, `int |f''| sqrt(s)`, `sqrt(T) |f'(T)|`.
//
// # Safety
// `b` must be a live handle; `out` must point to at least 3 doubles.
enum ExitprobStatus exitprob_exponent_integrals(const struct ExitprobBoundary *b,
                                                double t_horizon,
                                                double *out);

// `P(sup_{t <= T} B_t <= a)` in closed form.
//
// # Safety
// `out` must be a valid pointer.
enum ExitprobStatus exitprob_p_const_exact(double a, double t_horizon, double *out);

// `E[B_u | sup_{t <= T} B_t <= a]` by quadrature.
//
// # Safety
// `out_mean` must be a valid pointer.
enum ExitprobStatus exitprob_conditioned_mean(double u,
                                              double t_horizon,
                                              double a,
                                              double *out_mean);

// Supremum of `-E[B_u | sup <= a] / sqrt(u)` over the horizon grid.
//
// # Safety
// `t_grid` must point to `n_horizons` doubles; `out` must be valid.
enum ExitprobStatus exitprob_minimal_c_scan(double a,
                                            const double *t_grid,
                                            size_t n_horizons,
                                            size_t u_per_t,
                                            double *out);

// Monte Carlo exit estimate; `use_girsanov` selects the weighted estimator.
//
// # Safety
// `b` must be a live handle; `cfg` and `out` valid pointers.
enum ExitprobStatus exitprob_estimate_exit(const struct ExitprobBoundary *b,
                                           const struct ExitprobSimConfig *cfg,
                                           uint8_t use_girsanov,
                                           struct ExitprobEstimate *out);

// Evaluate the explicit survival lower bound.
//
// # Safety
// `b` must be a live handle; `out` a valid pointer.
enum ExitprobStatus exitprob_lower_bound(const struct ExitprobBoundary *b,
                                         double t_horizon,
                                         double c1,
                                         double c2,
                                         struct ExitprobBound *out);

// Weighted log-log fit of survival probabilities against horizons.
//
// # Safety
// `ts`, `p_hats`, `std_errs` must each point to `n_points` doubles; the
// three `out_*` pointers must be valid.
enum ExitprobStatus exitprob_fit_rate_exponent(const double *ts,
                                               const double *p_hats,
                                               const double *std_errs,
                                               size_t n_points,
                                               double *out_slope,
                                               double *out_intercept,
                                               double *out_halfwidth);

// Monte Carlo mean modulus of three-dimensional Brownian motion at time `s`.
//
// # Safety
// `out_mean` and `out_std_err` must be valid pointers.
enum ExitprobStatus exitprob_bessel_mean(double s,
                                         uint64_t n_paths,
                                         uint64_t seed,
                                         double *out_mean,
                                         double *out_std_err);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXITPROB_H */
