#ifndef BCMOD_H
#define BCMOD_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the numeric values match the CLI exit codes where they overlap.
 */
typedef enum BcmodStatus {
  BCMOD_STATUS_OK = 0,
  BCMOD_STATUS_VERIFICATION_FAILED = 1,
  BCMOD_STATUS_INVALID_ARGUMENT = 2,
  BCMOD_STATUS_NUMERICAL_BREAKDOWN = 3,
  BCMOD_STATUS_NULL_POINTER = 4,
  BCMOD_STATUS_PANIC = 5,
} BcmodStatus;

/**
 * A commuting operator `Q` built over a [`BcmodLame`].
 */
typedef struct BcmodCommutant BcmodCommutant;

/**
 * A spectral curve `F(X, Y) = 0`.
 */
typedef struct BcmodCurve BcmodCurve;

/**
 * A Lamé operator `d^2 - B wp` expanded at a basepoint, with its
 * Baker-Akhiezer coefficients.
 */
typedef struct BcmodLame BcmodLame;

typedef struct BcmodComplex {
  double re;
  double im;
} BcmodComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *bcmod_last_error(void);

/**
 * Invariants `g2`, `g3` of the lattice spanned by 1 and `omega`.
 *
 * # Safety
 * `g2` and `g3` must be valid for writes.
 */
enum BcmodStatus bcmod_lattice_invariants(struct BcmodComplex omega,
                                          struct BcmodComplex *g2,
                                          struct BcmodComplex *g3);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum BcmodStatus bcmod_lame_new(struct BcmodComplex omega,
                                struct BcmodComplex b,
                                struct BcmodComplex basepoint,
                                struct BcmodLame **out);

/**
 * # Safety
 * `h` must be null or a handle from [`bcmod_lame_new`] not yet freed.
 */
void bcmod_lame_free(struct BcmodLame *h);

/**
 * Builds `Q` from `A_{-M}, ..., A_0` (`len = M + 1`) of weight `weight`.
 * With `complete` nonzero only the leading entry is used; the lower entries
 * allowed by the weight are solved for.
 *
 * # Safety
 * `lame` must be a live handle, `principal` must point to `len` values and
 * `out` must be valid for writes.
 */
enum BcmodStatus bcmod_commutant_build(const struct BcmodLame *lame,
                                       const struct BcmodComplex *principal,
                                       size_t len,
                                       int32_t weight,
                                       int32_t complete,
                                       struct BcmodCommutant **out);

/**
 * Order of `Q` and the relative commutator residual `|[P, Q]| / |PQ|`.
 *
 * # Safety
 * `q` must be a live handle; outputs must be valid for writes.
 */
enum BcmodStatus bcmod_commutant_info(const struct BcmodCommutant *q,
                                      size_t *order,
                                      double *residual);

/**
 * Coefficient `A_s` of the spectral series, `s >= -M`.
 *
 * # Safety
 * `q` must be a live handle; `out` must be valid for writes.
 */
enum BcmodStatus bcmod_commutant_spectral_coeff(const struct BcmodCommutant *q,
                                                int64_t s,
                                                struct BcmodComplex *out);

/**
 * # Safety
 * `h` must be null or a live handle.
 */
void bcmod_commutant_free(struct BcmodCommutant *h);

/**
 * Spectral curve of the pair `(P, Q)`.
 *
 * # Safety
 * Both handles must be live and built over each other; `out` must be valid
 * for writes.
 */
enum BcmodStatus bcmod_curve_compute(const struct BcmodLame *lame,
                                     const struct BcmodCommutant *q,
                                     struct BcmodCurve **out);

/**
 * Coefficient of `X^j Y^k`.
 *
 * # Safety
 * `c` must be a live handle; `out` must be valid for writes.
 */
enum BcmodStatus bcmod_curve_coeff(const struct BcmodCurve *c,
                                   size_t j,
                                   size_t k,
                                   struct BcmodComplex *out);

/**
 * `F(x, y)`.
 *
 * # Safety
 * `c` must be a live handle; `out` must be valid for writes.
 */
enum BcmodStatus bcmod_curve_eval(const struct BcmodCurve *c,
                                  struct BcmodComplex x,
                                  struct BcmodComplex y,
                                  struct BcmodComplex *out);

/**
 * Arithmetic genus. `*varpi` is -1 and `*degenerate` is 1 when the curve is
 * non-reduced or reducible.
 *
 * # Safety
 * `c` must be a live handle; outputs must be valid for writes.
 */
enum BcmodStatus bcmod_curve_genus(const struct BcmodCurve *c, int64_t *varpi, int32_t *degenerate);

/**
 * # Safety
 * `h` must be null or a live handle.
 */
void bcmod_curve_free(struct BcmodCurve *h);

/**
 * Monodromy of `P psi = x psi` along a closed polyline. `vertices` holds
 * `n_vertices` points starting and ending at the operator's basepoint;
 * `matrix` receives the `N x N` result in row-major order.
 *
 * # Safety
 * `lame` must be a live handle, `vertices` must point to `n_vertices`
 * values and `matrix` must have room for `matrix_len` values.
 */
enum BcmodStatus bcmod_monodromy(const struct BcmodLame *lame,
                                 struct BcmodComplex x,
                                 const struct BcmodComplex *vertices,
                                 size_t n_vertices,
                                 struct BcmodComplex *matrix,
                                 size_t matrix_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BCMOD_H */
