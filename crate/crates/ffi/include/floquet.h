/* Generated by cbindgen from crates/ffi. Do not edit. */

#ifndef FLOQUET_H
#define FLOQUET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FloquetStatus {
  FLOQUET_STATUS_OK = 0,
  FLOQUET_STATUS_NULL_POINTER = 1,
  FLOQUET_STATUS_INVALID_ARGUMENT = 2,
  FLOQUET_STATUS_OUT_OF_RANGE = 3,
  FLOQUET_STATUS_SINGULAR_CONDITION = 4,
  FLOQUET_STATUS_NO_SOLUTION = 5,
  FLOQUET_STATUS_NUMERIC_FAILURE = 6,
  FLOQUET_STATUS_PANIC = 7,
} FloquetStatus;

typedef enum FloquetShape {
  FLOQUET_SHAPE_COSINE = 0,
  FLOQUET_SHAPE_SQUARE = 1,
} FloquetShape;

typedef enum FloquetConvention {
  FLOQUET_CONVENTION_SUBCYCLE = 0,
  FLOQUET_CONVENTION_FULL_CYCLE = 1,
} FloquetConvention;

typedef enum FloquetFamily {
  /**
   * Closed form `(J0(4v) - 1) / 32`.
   */
  FLOQUET_FAMILY_COSINE = 0,
  /**
   * Closed form `(sinc(2 pi v) - 1) / 16`.
   */
  FLOQUET_FAMILY_SQUARE = 1,
  /**
   * Truncated series over a moment table.
   */
  FLOQUET_FAMILY_SERIES = 2,
} FloquetFamily;

typedef enum FloquetTarget {
  FLOQUET_TARGET_ISING = 0,
  FLOQUET_TARGET_XY = 1,
  FLOQUET_TARGET_HEISENBERG = 2,
  /**
   * Uses the `a` and `b` arguments.
   */
  FLOQUET_TARGET_CUSTOM = 3,
} FloquetTarget;

/**
 * Opaque table of pulse moments.
 */
typedef struct FloquetMomentTable FloquetMomentTable;

/**
 * Opaque pulse profile.
 */
typedef struct FloquetProfile FloquetProfile;

/**
 * Opaque result of a condition solve.
 */
typedef struct FloquetSolution FloquetSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *floquet_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next
 * call into the library on the same thread.
 */
const char *floquet_last_error(void);

/**
 * `U(v)` for the cosine pulse, `(J0(4v) - 1) / 32`.
 */
double floquet_u_cosine_closed(double v);

/**
 * `U(v)` for the square pulse, `(sinc(2 pi v) - 1) / 16`.
 */
double floquet_u_square_closed(double v);

/**
 * Creates a two-subcycle profile driving global `sigma^1` then global `sigma^2`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum FloquetStatus floquet_profile_new(enum FloquetShape shape,
                                       double strength,
                                       double subcycle_duration,
                                       struct FloquetProfile **out);

/**
 * # Safety
 * `profile` must be NULL or a handle from [`floquet_profile_new`] not yet freed.
 */
void floquet_profile_free(struct FloquetProfile *profile);

/**
 * Moments `overline{G^{2p}}` for `p = 1..p_max` under the given convention.
 *
 * # Safety
 * `profile` must be a live profile handle and `out` writable.
 */
enum FloquetStatus floquet_moments_compute(const struct FloquetProfile *profile,
                                           size_t p_max,
                                           enum FloquetConvention conv,
                                           struct FloquetMomentTable **out);

/**
 * Largest `p` stored in the table, or 0 for NULL.
 *
 * # Safety
 * `table` must be NULL or a live moment-table handle.
 */
size_t floquet_moments_p_max(const struct FloquetMomentTable *table);

/**
 * # Safety
 * `table` must be a live moment-table handle and `out` writable.
 */
enum FloquetStatus floquet_moments_get(const struct FloquetMomentTable *table,
                                       size_t p,
                                       double *out);

/**
 * # Safety
 * `table` must be NULL or a live moment-table handle.
 */
void floquet_moments_free(struct FloquetMomentTable *table);

/**
 * Truncated series `U(v)` through `p_max` and the magnitude of the first dropped term.
 *
 * # Safety
 * `table` must be a live moment-table handle; `out_value` writable; `out_tail` NULL or writable.
 */
enum FloquetStatus floquet_u_series(const struct FloquetMomentTable *table,
                                    double v,
                                    size_t p_max,
                                    double *out_value,
                                    double *out_tail);

/**
 * Solves the engineering condition at anisotropy `s`. `moments` and `p_max` are
 * used only for [`FloquetFamily::Series`]; `a` and `b` only for [`FloquetTarget::Custom`].
 *
 * # Safety
 * `moments` must be NULL or a live moment-table handle; `out` writable.
 */
enum FloquetStatus floquet_solve_condition(enum FloquetFamily family,
                                           const struct FloquetMomentTable *moments,
                                           size_t p_max,
                                           double s,
                                           enum FloquetTarget target,
                                           double a,
                                           double b,
                                           struct FloquetSolution **out);

/**
 * Number of roots found, or 0 for NULL.
 *
 * # Safety
 * `solution` must be NULL or a live solution handle.
 */
size_t floquet_solution_len(const struct FloquetSolution *solution);

/**
 * Root `index` in ascending order.
 *
 * # Safety
 * `solution` must be a live solution handle and `out` writable.
 */
enum FloquetStatus floquet_solution_root(const struct FloquetSolution *solution,
                                         size_t index,
                                         double *out);

/**
 * Root of smallest magnitude; [`FloquetStatus::NoSolution`] when there is none.
 *
 * # Safety
 * `solution` must be a live solution handle and `out` writable.
 */
enum FloquetStatus floquet_solution_preferred(const struct FloquetSolution *solution, double *out);

/**
 * # Safety
 * `solution` must be NULL or a live solution handle.
 */
void floquet_solution_free(struct FloquetSolution *solution);

/**
 * Coefficients `(A, B)` of the effective `A H_XY + B H_ZZ` for a dipolar XXZ chain
 * of `n_sites` driven by `profile`.
 *
 * # Safety
 * `profile` must be a live profile handle; `out_a` and `out_b` writable.
 */
enum FloquetStatus floquet_effective_xxz(size_t n_sites,
                                         double j_perp,
                                         double j_z,
                                         const struct FloquetProfile *profile,
                                         enum FloquetConvention conv,
                                         double *out_a,
                                         double *out_b);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOQUET_H */
