#ifndef ELAT_H
#define ELAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ElatStatus {
  ELAT_STATUS_OK = 0,
  /**
   * Null pointer, bad length or out-of-range index.
   */
  ELAT_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The library rejected the problem or parameters.
   */
  ELAT_STATUS_VALIDATION = 2,
  /**
   * A solver failed.
   */
  ELAT_STATUS_SOLVER = 3,
  /**
   * A Rust panic was caught at the boundary.
   */
  ELAT_STATUS_PANIC = 4,
} ElatStatus;

/**
 * A problem definition: a 1D piecewise-constant potential or a 2D union of
 * rectangles with a constant potential.
 */
typedef struct ElatProblem ElatProblem;

/**
 * Result of [`elat_localize`].
 */
typedef struct ElatReport ElatReport;

/**
 * Search parameters. Obtain defaults from [`elat_params_default`].
 */
typedef struct ElatParams {
  double a;
  double b;
  double s;
  double delta_star;
  /**
   * Grid spacing of the finite-difference backend; `0` selects the
   * transfer-matrix backend (1D only).
   */
  double h;
  size_t n_poles;
  size_t subspace_dim;
  /**
   * Largest sub-region aspect ratio; `0` searches the region whole.
   */
  double max_aspect;
  uint64_t seed;
} ElatParams;

/**
 * One candidate and its decision.
 */
typedef struct ElatOutcome {
  double re_mu;
  double im_mu;
  double alpha;
  double lambda;
  double delta;
  double tau;
  double residual;
  bool accepted;
} ElatOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *elat_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *elat_version(void);

/**
 * Fills `out` with the default parameters for the interval `[a, b]`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `ElatParams`.
 */
enum ElatStatus elat_params_default(double a, double b, struct ElatParams *out);

/**
 * Creates a 1D problem on `[breakpoints[0], breakpoints[n_pieces]]` with
 * `values[k]` on piece `k`; `region_pieces` lists the pieces of `R`,
 * counted from 1.
 *
 * # Safety
 * `breakpoints` must hold `n_pieces + 1` values, `values` `n_pieces` values
 * and `region_pieces` `n_region` values. `out` must be writable.
 */
enum ElatStatus elat_problem_new_1d(const double *breakpoints,
                                    const double *values,
                                    size_t n_pieces,
                                    const size_t *region_pieces,
                                    size_t n_region,
                                    struct ElatProblem **out);

/**
 * Creates a 2D problem on a union of rectangles `(x0, x1, y0, y1)` with
 * constant potential `background`; `R` is the union of `region_rects`.
 *
 * # Safety
 * `domain_rects` must hold `4 * n_domain` values and `region_rects`
 * `4 * n_region` values. `out` must be writable.
 */
enum ElatStatus elat_problem_new_2d(const double *domain_rects,
                                    size_t n_domain,
                                    const double *region_rects,
                                    size_t n_region,
                                    double background,
                                    struct ElatProblem **out);

/**
 * # Safety
 * `problem` must be null or a handle from `elat_problem_new_*` not yet freed.
 */
void elat_problem_free(struct ElatProblem *problem);

/**
 * Finds the localized eigenpairs of `problem` for `params`.
 *
 * # Safety
 * `problem` must be a live handle, `params` readable and `out` writable.
 */
enum ElatStatus elat_localize(const struct ElatProblem *problem,
                              const struct ElatParams *params,
                              struct ElatReport **out);

/**
 * # Safety
 * `report` must be null or a handle from `elat_localize` not yet freed.
 */
void elat_report_free(struct ElatReport *report);

/**
 * Number of outcomes (one per candidate); `0` for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t elat_report_len(const struct ElatReport *report);

/**
 * True when the search found nothing and certified the interval empty.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
bool elat_report_is_empty_certificate(const struct ElatReport *report);

/**
 * Copies outcome `k` (in order of refined eigenvalue) into `out`.
 *
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
enum ElatStatus elat_report_outcome(const struct ElatReport *report,
                                    size_t k,
                                    struct ElatOutcome *out);

/**
 * Copies the refined eigenvector of outcome `k` into `buf`. `*len` is the
 * capacity on entry and the vector length on return; pass a null `buf` to
 * query the length. Transfer-matrix results have length zero.
 *
 * # Safety
 * `report` must be a live handle, `len` readable and writable, and `buf`
 * null or writable for `*len` values.
 */
enum ElatStatus elat_report_eigenvector(const struct ElatReport *report,
                                        size_t k,
                                        double *buf,
                                        size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ELAT_H */
