#ifndef NPIV_H
#define NPIV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NpivStatus {
  NPIV_STATUS_OK = 0,
  NPIV_STATUS_NULL_POINTER = 1,
  NPIV_STATUS_INVALID_ARGUMENT = 2,
  NPIV_STATUS_DOMAIN = 3,
  NPIV_STATUS_DIMENSION = 4,
  NPIV_STATUS_INFEASIBLE = 5,
  NPIV_STATUS_SAMPLE = 6,
  NPIV_STATUS_CONFIG = 7,
  NPIV_STATUS_IO = 8,
  NPIV_STATUS_PANIC = 9,
} NpivStatus;

typedef enum NpivBasis {
  // `1, √2 cos(πx), √2 cos(2πx), ...`
  NPIV_BASIS_COSINE = 0,
  // `1, √2 cos(2πx), √2 sin(2πx), ...`
  NPIV_BASIS_TRIGONOMETRIC = 1,
} NpivBasis;

typedef struct NpivExperiment NpivExperiment;

typedef struct NpivFit NpivFit;

typedef struct NpivSample NpivSample;

// Tuning of the dimension selection. Obtain defaults from
// [`npiv_penalty_default`].
typedef struct NpivPenalty {
  double kappa;
  double sigma_multiplier;
  // Non-zero: threshold on `‖[T̂]⁻¹‖` instead of its square.
  int32_t unsquared_threshold;
  // Largest candidate dimension; 0 selects `⌊n^{1/4}⌋`.
  size_t max_dimension;
} NpivPenalty;

// One row of an experiment's record table.
typedef struct NpivRecord {
  size_t n;
  size_t rep;
  size_t m_hat;
  size_t m_cap;
  double mise_adaptive;
  size_t m_star;
  double mise_oracle;
  double minimax_rate;
  double thresholded_frac;
} NpivRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next call into the library from this thread.
const char *npiv_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *npiv_version(void);

struct NpivPenalty npiv_penalty_default(void);

// Threshold `α_n` of the truncation rule.
double npiv_alpha_n(size_t n);

// Evaluates basis function `f_j(x)`.
//
// # Safety
// `out` must be valid for one write.
enum NpivStatus npiv_basis_eval(enum NpivBasis kind, size_t j, double x, double *out);

// Copies `len` observations into a new sample.
//
// # Safety
// `y`, `z`, `w` must each point to `len` readable doubles; `out` must be
// valid for one write.
enum NpivStatus npiv_sample_new(const double *y,
                                const double *z,
                                const double *w,
                                size_t len,
                                struct NpivSample **out);

// Reads a `y,z,w` CSV file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be valid for one write.
enum NpivStatus npiv_sample_read_csv(const char *path, struct NpivSample **out);

// Number of observations, 0 for a null handle.
//
// # Safety
// `sample` must be null or a live handle.
size_t npiv_sample_len(const struct NpivSample *sample);

// # Safety
// `sample` must be null or a handle not yet freed.
void npiv_sample_free(struct NpivSample *sample);

// Runs the adaptive estimator with the same basis for `Z` and `W`.
// A null `penalty` uses [`npiv_penalty_default`].
//
// # Safety
// `sample` must be a live handle, `penalty` null or readable, `out` valid
// for one write.
enum NpivStatus npiv_fit(const struct NpivSample *sample,
                         enum NpivBasis basis,
                         const struct NpivPenalty *penalty,
                         struct NpivFit **out);

// Selected dimension `m̂`, 0 for a null handle.
//
// # Safety
// `fit` must be null or a live handle.
size_t npiv_fit_m_hat(const struct NpivFit *fit);

// Random truncation index `M̂`, 0 for a null handle.
//
// # Safety
// `fit` must be null or a live handle.
size_t npiv_fit_m_cap(const struct NpivFit *fit);

// Copies up to `cap` coefficients of `θ̂_{m̂}` into `buf` and stores the
// full length in `len`. Pass `cap = 0` to query the length.
//
// # Safety
// `fit` must be a live handle, `buf` writable for `cap` doubles, `len`
// valid for one write.
enum NpivStatus npiv_fit_theta(const struct NpivFit *fit, double *buf, size_t cap, size_t *len);

// Evaluates the fitted structural function at `x ∈ [0,1]`.
//
// # Safety
// `fit` must be a live handle, `out` valid for one write.
enum NpivStatus npiv_fit_eval(const struct NpivFit *fit, double x, double *out);

// # Safety
// `fit` must be null or a handle not yet freed.
void npiv_fit_free(struct NpivFit *fit);

// Runs the experiment described by a TOML config file.
//
// # Safety
// `config_path` must be a NUL-terminated string; `out` valid for one write.
enum NpivStatus npiv_experiment_run(const char *config_path, struct NpivExperiment **out);

// Number of records, 0 for a null handle.
//
// # Safety
// `exp` must be null or a live handle.
size_t npiv_experiment_len(const struct NpivExperiment *exp);

// Copies record `index` (sorted by `n`, then `rep`) into `out`.
//
// # Safety
// `exp` must be a live handle, `out` valid for one write.
enum NpivStatus npiv_experiment_record(const struct NpivExperiment *exp,
                                       size_t index,
                                       struct NpivRecord *out);

// # Safety
// `exp` must be null or a handle not yet freed.
void npiv_experiment_free(struct NpivExperiment *exp);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NPIV_H */
