#ifndef REGINT_H
#define REGINT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum RegintStatus {
  REGINT_STATUS_OK = 0,
  REGINT_STATUS_NULL_POINTER = 1,
  REGINT_STATUS_INVALID_UTF8 = 2,
  REGINT_STATUS_SYNTAX = 3,
  REGINT_STATUS_INDEX = 4,
  REGINT_STATUS_NOT_ELLIPTIC = 5,
  REGINT_STATUS_NOT_QUASI_ELLIPTIC = 6,
  REGINT_STATUS_NOT_ALMOST_ELLIPTIC = 7,
  REGINT_STATUS_UNSUPPORTED = 8,
  REGINT_STATUS_FAILED = 9,
  REGINT_STATUS_PANIC = 10,
} RegintStatus;

/**
 * Engine selector for [`regint_reg`], passed as its integer value.
 */
typedef enum RegintEngine {
  REGINT_ENGINE_ITERATED = 0,
  REGINT_ENGINE_FORESTS = 1,
  REGINT_ENGINE_CHAINS = 2,
  REGINT_ENGINE_HAE = 3,
} RegintEngine;

/**
 * A parsed expression.
 */
typedef struct RegintExpr RegintExpr;

/**
 * An exact value in `Q[I, E2, E4, E6, Y]`.
 */
typedef struct RegintValue RegintValue;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses `src`. `n` is the number of points, or 0 to use the largest index.
 *
 * # Safety
 * `src` must be a nul-terminated string and `out` a valid pointer.
 */
enum RegintStatus regint_expr_parse(const char *src, size_t n, struct RegintExpr **out);

/**
 * # Safety
 * `e` must come from [`regint_expr_parse`] and not be used afterwards.
 */
void regint_expr_free(struct RegintExpr *e);

/**
 * Canonical text form; null on a null handle.
 *
 * # Safety
 * `e` must be a live handle or null.
 */
char *regint_expr_render(const struct RegintExpr *e);

/**
 * Number of points the expression lives on.
 *
 * # Safety
 * `e` must be a live handle or null.
 */
size_t regint_expr_arity(const struct RegintExpr *e);

/**
 * Regularized integral over all points; `engine` is a [`RegintEngine`] value.
 *
 * # Safety
 * `e` must be a live handle and `out` a valid pointer.
 */
enum RegintStatus regint_reg(const struct RegintExpr *e, uint32_t engine, struct RegintValue **out);

/**
 * Ordered A-cycle integral; `order[0]` is integrated first.
 *
 * # Safety
 * `e` must be a live handle, `order` must point to `len` bytes and `out`
 * must be a valid pointer.
 */
enum RegintStatus regint_acycle(const struct RegintExpr *e,
                                const uint8_t *order,
                                size_t len,
                                struct RegintValue **out);

/**
 * Average of the ordered A-cycle integrals over all orders.
 *
 * # Safety
 * `e` must be a live handle and `out` a valid pointer.
 */
enum RegintStatus regint_acycle_average(const struct RegintExpr *e, struct RegintValue **out);

/**
 * Drops every term containing `Y`.
 *
 * # Safety
 * `v` must be a live value handle and `out` a valid pointer.
 */
enum RegintStatus regint_value_holomorphic_limit(const struct RegintValue *v,
                                                 struct RegintValue **out);

/**
 * Text form, e.g. `I^2*E2/12 - Y`.
 *
 * # Safety
 * `v` must be a live value handle or null.
 */
char *regint_value_render(const struct RegintValue *v);

/**
 * Text form in the basis `I, E2hat, E4, E6`; null if the value is not of
 * that form (see [`regint_last_error`]).
 *
 * # Safety
 * `v` must be a live value handle or null.
 */
char *regint_value_render_almost_holomorphic(const struct RegintValue *v);

/**
 * Nonzero when the value is exactly zero.
 *
 * # Safety
 * `v` must be a live value handle or null.
 */
int32_t regint_value_is_zero(const struct RegintValue *v);

/**
 * Nonzero when both values are equal.
 *
 * # Safety
 * Both arguments must be live value handles or null.
 */
int32_t regint_value_equal(const struct RegintValue *a, const struct RegintValue *b);

/**
 * # Safety
 * `v` must come from this library and not be used afterwards.
 */
void regint_value_free(struct RegintValue *v);

/**
 * Message of the last failure on this thread, or null. Owned by the
 * library; valid until the next failing call.
 */
const char *regint_last_error(void);

/**
 * # Safety
 * `s` must be a string returned by this library, or null.
 */
void regint_string_free(char *s);

/**
 * Library version, static storage.
 */
const char *regint_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGINT_H */
