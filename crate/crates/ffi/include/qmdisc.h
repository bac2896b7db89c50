#ifndef QMDISC_H
#define QMDISC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QmdStatus {
  QMD_STATUS_OK = 0,
  QMD_STATUS_NULL_POINTER = 1,
  /**
   * Argument outside the domain of the quantity.
   */
  QMD_STATUS_DOMAIN = 2,
  /**
   * Operator normalization or positivity violated.
   */
  QMD_STATUS_VALIDATION = 3,
  /**
   * Vanishing denominator.
   */
  QMD_STATUS_SINGULARITY = 4,
  /**
   * Finite-difference stencil crosses a branch boundary.
   */
  QMD_STATUS_BRANCH_CROSSING = 5,
  /**
   * Oracle result not certified; the best point is still written.
   */
  QMD_STATUS_NON_CONVERGENCE = 6,
  QMD_STATUS_EMPTY_COUNTS = 7,
  QMD_STATUS_CONFIG = 8,
  QMD_STATUS_IO = 9,
  QMD_STATUS_INTERNAL = 10,
} QmdStatus;

/**
 * Opaque table of optimal curves.
 */
typedef struct QmdCurveTable QmdCurveTable;

/**
 * Opaque simulation setup.
 */
typedef struct QmdExperiment QmdExperiment;

typedef struct QmdStrategyPoint {
  double p_success;
  double p_error;
  double p_inconclusive;
} QmdStrategyPoint;

/**
 * Mirror of the simulator's imperfection model.
 */
typedef struct QmdImperfections {
  double phase_noise_sigma_rad;
  double eta_d0;
  double eta_d1;
  double eta_da;
  double eta_db;
  double eta_di;
  double singlet_visibility;
  double splitter_imbalance;
} QmdImperfections;

/**
 * Coincidence counts, `cells[(x*2 + i)*3 + k]` for basis `x` (M = 0, N = 1),
 * first detector `i` and second detector `k` (A = 0, B = 1, I = 2).
 */
typedef struct QmdCounts {
  uint64_t cells[12];
} QmdCounts;

typedef struct QmdEstimate {
  struct QmdStrategyPoint point;
  double sigma_success;
  double sigma_error;
  double sigma_inconclusive;
  double relative_success;
  double sigma_relative;
  uint64_t registered;
} QmdEstimate;

typedef struct QmdCurveRow {
  double p_inc;
  double ps_entangled;
  double ps_single_optimal;
  double advantage;
} QmdCurveRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes of the last error message on this thread, excluding the
 * terminating nul; 0 when there is none.
 */
size_t qmd_last_error_length(void);

/**
 * Copies the last error message into `buf` (nul-terminated, truncated to
 * `len − 1` bytes) and returns the full message length.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes of writes.
 */
size_t qmd_last_error_message(char *buf, size_t len);

/**
 * Library version as a static nul-terminated string.
 */
const char *qmd_version(void);

/**
 * Entanglement-assisted optimum at inconclusive rate `p_inc ∈ [0, cos 2θ]`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QmdStatus qmd_entangled_success(double theta, double p_inc, struct QmdStrategyPoint *out);

/**
 * Single-qubit optimum at `p_inc ∈ [0, (1 + cos²2θ)/2]`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QmdStatus qmd_single_optimal(double theta, double p_inc, struct QmdStrategyPoint *out);

/**
 * Minimum-error point `((1 + sin 2θ)/2, (1 − sin 2θ)/2, 0)`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QmdStatus qmd_helstrom(double theta, struct QmdStrategyPoint *out);

/**
 * Single-probe point on the `q = 0` arc.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QmdStatus qmd_concave_branch(double theta, double p_inc, struct QmdStrategyPoint *out);

/**
 * Inconclusive rate where the convex and concave single-probe branches meet.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QmdStatus qmd_boundary_pib(double c, double *out);

/**
 * Inconclusive rate of the tangent point of the optimal mixture.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QmdStatus qmd_tangent_pit(double c, double *out);

/**
 * Entangled minus single-qubit optimum.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QmdStatus qmd_advantage(double theta, double p_inc, double *out);

/**
 * `d²P_S/dP_I²` on the convex single-probe branch.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QmdStatus qmd_second_derivative(double c, double p_inc, double *out);

/**
 * Numerical optimum over sequential strategies (ascent method). Writes the
 * best point even when it returns `NonConvergence`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QmdStatus qmd_oracle_optimize(double theta,
                                   double p_inc,
                                   double tol,
                                   uint64_t seed,
                                   size_t restarts,
                                   struct QmdStrategyPoint *out);

/**
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QmdStatus qmd_imperfections_ideal(struct QmdImperfections *out);

/**
 * The bundled `preset_paperlike` noise model.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QmdStatus qmd_imperfections_paperlike(struct QmdImperfections *out);

/**
 * Creates an ideal experiment with feed-forward enabled.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QmdStatus qmd_experiment_new(double theta,
                                  double transmittance,
                                  uint64_t trials,
                                  uint64_t seed,
                                  struct QmdExperiment **out);

/**
 * # Safety
 * `exp` must come from [`qmd_experiment_new`]; `imp` must be null or valid.
 */
enum QmdStatus qmd_experiment_set_imperfections(struct QmdExperiment *exp,
                                                const struct QmdImperfections *imp);

/**
 * # Safety
 * `exp` must come from [`qmd_experiment_new`].
 */
enum QmdStatus qmd_experiment_set_feed_forward(struct QmdExperiment *exp, bool enabled);

/**
 * Runs all trials; the counts depend only on the configuration and seed.
 *
 * # Safety
 * `exp` must come from [`qmd_experiment_new`]; `out` must be null or valid.
 */
enum QmdStatus qmd_experiment_run(const struct QmdExperiment *exp, struct QmdCounts *out);

/**
 * Runs all trials and estimates the probabilities from the counts.
 *
 * # Safety
 * `exp` must come from [`qmd_experiment_new`]; `out` must be null or valid.
 */
enum QmdStatus qmd_experiment_estimate(const struct QmdExperiment *exp, struct QmdEstimate *out);

/**
 * # Safety
 * `exp` must be null or come from [`qmd_experiment_new`] and not be used
 * afterwards.
 */
void qmd_experiment_free(struct QmdExperiment *exp);

/**
 * Tabulates both optima over `start:stop:step`, clipped to `[0, cos 2θ]`
 * where the entangled curve is defined.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QmdStatus qmd_curve_new(double theta,
                             double start,
                             double stop,
                             double step,
                             struct QmdCurveTable **out);

/**
 * # Safety
 * `table` must come from [`qmd_curve_new`]; `out` must be null or valid.
 */
enum QmdStatus qmd_curve_len(const struct QmdCurveTable *table, size_t *out);

/**
 * # Safety
 * `table` must come from [`qmd_curve_new`]; `out` must be null or valid.
 */
enum QmdStatus qmd_curve_row(const struct QmdCurveTable *table,
                             size_t index,
                             struct QmdCurveRow *out);

/**
 * # Safety
 * `table` must be null or come from [`qmd_curve_new`] and not be used
 * afterwards.
 */
void qmd_curve_free(struct QmdCurveTable *table);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QMDISC_H */
