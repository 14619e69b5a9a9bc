#ifndef NPEO_H
#define NPEO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call; `NPEO_STATUS_OK` is zero.
 */
typedef enum NpeoStatus {
  NPEO_STATUS_OK = 0,
  NPEO_STATUS_NULL_POINTER = 1,
  NPEO_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Too few class-0 scores for the requested `alpha` and `delta`.
   */
  NPEO_STATUS_INFEASIBLE = 3,
  NPEO_STATUS_OUT_OF_RANGE = 4,
  NPEO_STATUS_NO_VIABLE_PAIR = 5,
  NPEO_STATUS_EMPTY_CANDIDATES = 6,
  NPEO_STATUS_EMPTY_CELL = 7,
  NPEO_STATUS_ROOT_NOT_BRACKETED = 8,
  NPEO_STATUS_NON_MONOTONE = 9,
  NPEO_STATUS_IO = 10,
  NPEO_STATUS_PARSE = 11,
  /**
   * A Rust panic was caught at the boundary.
   */
  NPEO_STATUS_PANIC = 12,
} NpeoStatus;

typedef enum NpeoMethod {
  NPEO_METHOD_OP = 0,
  NPEO_METHOD_MP = 1,
  NPEO_METHOD_NP_ONLY = 2,
} NpeoMethod;

typedef enum NpeoGroup {
  NPEO_GROUP_A = 0,
  NPEO_GROUP_B = 1,
} NpeoGroup;

typedef enum NpeoOracleKind {
  NPEO_ORACLE_KIND_BAYES = 0,
  /**
   * Likelihood-ratio NP oracle with per-group thresholds.
   */
  NPEO_ORACLE_KIND_NP = 1,
  /**
   * Best single threshold shared by both groups.
   */
  NPEO_ORACLE_KIND_NP_SHARED = 2,
  NPEO_ORACLE_KIND_NP_EO = 3,
} NpeoOracleKind;

/**
 * Outcome of [`npeo_calibrate`].
 */
typedef struct NpeoCalibration NpeoCalibration;

/**
 * Left-out scores, one sorted sequence per cell.
 */
typedef struct NpeoScores NpeoScores;

typedef struct NpeoConfig {
  double alpha;
  double delta;
  double epsilon;
  double gamma;
  /**
   * Type I margin of the multiple-pivot method.
   */
  double eta;
  bool use_half_delta;
} NpeoConfig;

/**
 * Flat view of a calibration. Orders are 1-based; when `has_orders` is
 * false (NP-only) the order and pair fields are zero or NaN.
 */
typedef struct NpeoCalibrationSummary {
  double threshold_a;
  double threshold_b;
  double pivot_a;
  double pivot_b;
  size_t pivot_order_a;
  size_t pivot_order_b;
  size_t l_a;
  size_t l_b;
  bool has_orders;
  size_t order_a;
  size_t order_b;
  double violation_prob;
  double empirical_type2;
  size_t pivot_pairs;
  size_t pivot_pairs_searched;
} NpeoCalibrationSummary;

/**
 * Univariate Gaussian group model; arrays are cell-indexed.
 */
typedef struct NpeoGaussianModel {
  double mean[4];
  double variance[4];
  /**
   * Joint probabilities `P(S = s, Y = y)`, summing to 1.
   */
  double prob[4];
} NpeoGaussianModel;

typedef struct NpeoOracleSolution {
  double threshold_a;
  double threshold_b;
  double r0;
  double r1;
  double r0_a;
  double r0_b;
  double r1_a;
  double r1_b;
  double l1;
  bool eo_binding;
} NpeoOracleSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *npeo_version(void);

/**
 * Message of the most recent failed call on this thread, or NULL. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *npeo_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a pointer obtained from this library's string
 * outputs that has not been freed yet.
 */
void npeo_string_free(char *s);

/**
 * Fills `out` with the library defaults (`alpha` 0.1, `delta` 0.05,
 * `epsilon` 0.2, `gamma` 0.05, `eta` 0.005, full `delta`).
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum NpeoStatus npeo_config_default(struct NpeoConfig *out);

/**
 * Smallest order `k` whose binomial tail at level `alpha` is at most
 * `delta`.
 *
 * # Safety
 * `out_k` must be NULL or valid for writes.
 */
enum NpeoStatus npeo_np_order(size_t n, double alpha, double delta, size_t *out_k);

/**
 * Copies four score arrays into a new handle. A NULL array is allowed only
 * with length zero, which then fails with `NPEO_STATUS_EMPTY_CELL`.
 *
 * # Safety
 * Each non-NULL array must hold at least its stated number of doubles;
 * `out` must be valid for writes.
 */
enum NpeoStatus npeo_scores_new(const double *a0,
                                size_t n_a0,
                                const double *b0,
                                size_t n_b0,
                                const double *a1,
                                size_t n_a1,
                                const double *b1,
                                size_t n_b1,
                                struct NpeoScores **out);

/**
 * # Safety
 * `scores` must be NULL or a handle from [`npeo_scores_new`] not yet freed.
 */
void npeo_scores_free(struct NpeoScores *scores);

/**
 * Calibrates group thresholds from `scores`.
 *
 * # Safety
 * `scores` must be a live handle, `config` a valid pointer and `out` valid
 * for writes.
 */
enum NpeoStatus npeo_calibrate(const struct NpeoScores *scores,
                               const struct NpeoConfig *config,
                               enum NpeoMethod method,
                               struct NpeoCalibration **out);

/**
 * # Safety
 * `cal` must be a live handle and `out` valid for writes.
 */
enum NpeoStatus npeo_calibration_summary(const struct NpeoCalibration *cal,
                                         struct NpeoCalibrationSummary *out);

/**
 * Predicted label (0 or 1) of `score` in `group`: 1 iff the score is
 * strictly above the group threshold.
 *
 * # Safety
 * `cal` must be a live handle and `out_label` valid for writes.
 */
enum NpeoStatus npeo_calibration_predict(const struct NpeoCalibration *cal,
                                         enum NpeoGroup group,
                                         double score,
                                         int32_t *out_label);

/**
 * The calibration as a JSON document; free it with [`npeo_string_free`].
 *
 * # Safety
 * `cal` must be a live handle and `out` valid for writes.
 */
enum NpeoStatus npeo_calibration_to_json(const struct NpeoCalibration *cal, char **out);

/**
 * # Safety
 * `cal` must be NULL or a handle from [`npeo_calibrate`] not yet freed.
 */
void npeo_calibration_free(struct NpeoCalibration *cal);

/**
 * Reads a model description file (TOML with `mean`, `variance` and `prob`
 * tables keyed `a0, b0, a1, b1`).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum NpeoStatus npeo_model_load(const char *path, struct NpeoGaussianModel *out);

/**
 * Solves one population oracle. `alpha` is ignored by `BAYES` and
 * `epsilon` is used only by `NP_EO`.
 *
 * # Safety
 * `model` must be a valid pointer and `out` valid for writes.
 */
enum NpeoStatus npeo_oracle(const struct NpeoGaussianModel *model,
                            enum NpeoOracleKind kind,
                            double alpha,
                            double epsilon,
                            struct NpeoOracleSolution *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NPEO_H */
