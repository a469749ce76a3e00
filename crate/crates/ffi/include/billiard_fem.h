#ifndef BILLIARD_FEM_H
#define BILLIARD_FEM_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum BfStatus {
  BF_STATUS_OK = 0,
  BF_STATUS_NULL_POINTER = 1,
  BF_STATUS_INVALID_ARGUMENT = 2,
  BF_STATUS_PARSE = 3,
  BF_STATUS_MESH = 4,
  BF_STATUS_ASSEMBLY = 5,
  BF_STATUS_SOLVE = 6,
  BF_STATUS_NO_CONVERGENCE = 7,
  BF_STATUS_OUT_OF_RANGE = 8,
  BF_STATUS_UNSUPPORTED = 9,
  BF_STATUS_IO = 10,
  BF_STATUS_BUFFER_TOO_SMALL = 11,
  BF_STATUS_PANIC = 12,
} BfStatus;

typedef enum BfStripAxis {
  BF_STRIP_AXIS_VERTICAL = 0,
  BF_STRIP_AXIS_HORIZONTAL = 1,
} BfStripAxis;

typedef enum BfRenderMode {
  BF_RENDER_MODE_PSI = 0,
  BF_RENDER_MODE_DENSITY = 1,
} BfRenderMode;

/**
 * Opaque region handle.
 */
typedef struct BfRegion BfRegion;

/**
 * Opaque handle to a meshed region and its computed spectrum.
 */
typedef struct BfSolution BfSolution;

/**
 * Discretization and solver settings.
 */
typedef struct BfSolveParams {
  /**
   * Upper bound on triangle area.
   */
  double h;
  /**
   * Boundary chord tolerance; zero or negative selects `sqrt(h) / 10`.
   */
  double chord_tolerance;
  /**
   * Element order, 1 or 2.
   */
  uint32_t order;
  size_t num_states;
  double rel_residual_tol;
} BfSolveParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *bf_version(void);

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *bf_last_error_message(void);

/**
 * Defaults: `h = 1e-3`, default chord tolerance, P2, 16 states, tolerance `1e-9`.
 */
struct BfSolveParams bf_solve_params_default(void);

/**
 * Parses a region spec such as `"stadium"` or `"circle r=1"`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `region` a writable pointer.
 */
enum BfStatus bf_region_new(const char *spec, struct BfRegion **region);

/**
 * # Safety
 * `region` must come from [`bf_region_new`] or be null.
 */
void bf_region_free(struct BfRegion *region);

/**
 * Exact area of the region.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BfStatus bf_region_area(const struct BfRegion *region, double *area);

/**
 * Whether `(x, y)` lies inside the region.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BfStatus bf_region_contains(const struct BfRegion *region, double x, double y, bool *inside);

/**
 * Closed-form wavenumbers of the first `len` levels, repeated by multiplicity.
 * Only circles, equilateral triangles and rectangles are supported.
 *
 * # Safety
 * `buf` must hold `len` values.
 */
enum BfStatus bf_exact_wavenumbers(const struct BfRegion *region, double *buf, size_t len);

/**
 * Meshes, assembles and solves for the lowest `params.num_states` levels.
 *
 * # Safety
 * `region` and `params` must be valid; `solution` must be writable.
 */
enum BfStatus bf_solve(const struct BfRegion *region,
                       const struct BfSolveParams *params,
                       struct BfSolution **solution);

/**
 * # Safety
 * `solution` must come from [`bf_solve`] or be null.
 */
void bf_solution_free(struct BfSolution *solution);

/**
 * Number of computed states.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BfStatus bf_solution_len(const struct BfSolution *solution, size_t *len);

/**
 * Number of interior degrees of freedom, the length of each coefficient vector.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BfStatus bf_solution_n_dof(const struct BfSolution *solution, size_t *n_dof);

/**
 * Whether inertia confirmed that no level below the last one was missed.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BfStatus bf_solution_certified(const struct BfSolution *solution, bool *certified);

/**
 * Copies all wavenumbers in ascending order. `written` receives the count.
 *
 * # Safety
 * `buf` must hold `len` values; `written` may be null.
 */
enum BfStatus bf_solution_wavenumbers(const struct BfSolution *solution,
                                      double *buf,
                                      size_t len,
                                      size_t *written);

/**
 * Eigenvalue `lambda = k^2` and relative residual of one state.
 *
 * # Safety
 * `solution` must be valid; either output may be null.
 */
enum BfStatus bf_solution_eigenvalue(const struct BfSolution *solution,
                                     size_t index,
                                     double *lambda,
                                     double *residual);

/**
 * Copies the mass-normalized coefficient vector of one state.
 *
 * # Safety
 * `buf` must hold `len` values; `written` may be null.
 */
enum BfStatus bf_solution_coefficients(const struct BfSolution *solution,
                                       size_t index,
                                       double *buf,
                                       size_t len,
                                       size_t *written);

/**
 * Inverse participation ratio `Area * integral of |psi|^4`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BfStatus bf_solution_ipr(const struct BfSolution *solution, size_t index, double *ipr);

/**
 * Probability inside a central strip whose width is the fraction `width` of the
 * bounding box along `axis`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BfStatus bf_solution_strip_mass(const struct BfSolution *solution,
                                     size_t index,
                                     enum BfStripAxis axis,
                                     double width,
                                     double *mass);

/**
 * Rasterizes one state over the region's bounding box and writes a binary PGM.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum BfStatus bf_solution_render_pgm(const struct BfSolution *solution,
                                     size_t index,
                                     size_t nx,
                                     size_t ny,
                                     enum BfRenderMode mode,
                                     const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BILLIARD_FEM_H */
