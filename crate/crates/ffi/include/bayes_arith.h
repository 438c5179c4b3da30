#ifndef BAYES_ARITH_H
#define BAYES_ARITH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BaArithmetic {
  BA_ARITHMETIC_EXACT = 0,
  BA_ARITHMETIC_FLOAT = 1,
} BaArithmetic;

typedef enum BaFactorOutcome {
  BA_FACTOR_OUTCOME_COMPOSITE = 0,
  BA_FACTOR_OUTCOME_PRIME_BY_PROCEDURE = 1,
  BA_FACTOR_OUTCOME_INFEASIBLE_SYSTEM = 2,
  BA_FACTOR_OUTCOME_DISCREPANCY = 3,
} BaFactorOutcome;

typedef enum BaStatus {
  BA_STATUS_OK = 0,
  BA_STATUS_NULL_POINTER = 1,
  BA_STATUS_INVALID_ARGUMENT = 2,
  BA_STATUS_OUT_OF_RANGE = 3,
  BA_STATUS_PARSE = 4,
  BA_STATUS_IO = 5,
  /**
   * The system is malformed or the solver hit an internal limit.
   */
  BA_STATUS_INTERNAL = 6,
  BA_STATUS_PANIC = 7,
} BaStatus;

/**
 * Opaque system handle.
 */
typedef struct BaSystem BaSystem;

typedef struct BaCounts {
  uint64_t unknowns;
  uint64_t positive_unknowns;
  uint64_t equations;
  uint64_t data;
  uint64_t structural;
  uint64_t universal;
  uint64_t extra;
} BaCounts;

typedef struct BaFactorResult {
  enum BaFactorOutcome outcome;
  /**
   * Factors when `outcome` is composite and they fit in 64 bits, else 0.
   */
  uint64_t a;
  uint64_t b;
  uint64_t objectives_evaluated;
} BaFactorResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *ba_last_error(void);

/**
 * Library version as a static string.
 */
const char *ba_version(void);

/**
 * Encodes n-bit addition. A negative `u`, `v` or `s` leaves that operand free.
 *
 * # Safety
 * `out` must be valid for writing a handle pointer.
 */
enum BaStatus ba_encode_addition(uint32_t n,
                                 int64_t u,
                                 int64_t v,
                                 int64_t s,
                                 struct BaSystem **out);

/**
 * Encodes n x m-bit multiplication with all operands free.
 *
 * # Safety
 * `out` must be valid for writing a handle pointer.
 */
enum BaStatus ba_encode_multiplication(uint32_t n, uint32_t m, struct BaSystem **out);

/**
 * Encodes the factoring system of the decimal integer `c`.
 *
 * # Safety
 * `c` must be a nul-terminated string and `out` valid for writing.
 */
enum BaStatus ba_encode_factoring(const char *c, struct BaSystem **out);

/**
 * Reads a native-format system file.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` valid for writing.
 */
enum BaStatus ba_system_read(const char *path, struct BaSystem **out);

/**
 * Writes a system in native format.
 *
 * # Safety
 * `sys` must be a live handle and `path` a nul-terminated string.
 */
enum BaStatus ba_system_write(const struct BaSystem *sys, const char *path);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `sys` must be null or a handle not yet freed.
 */
void ba_system_free(struct BaSystem *sys);

/**
 * Counts of unknowns and equations by role.
 *
 * # Safety
 * `sys` must be a live handle and `out` valid for writing.
 */
enum BaStatus ba_system_counts(const struct BaSystem *sys, struct BaCounts *out);

/**
 * Sets `*feasible` to 1 when the system has a nonnegative solution.
 *
 * # Safety
 * `sys` must be a live handle and `feasible` valid for writing.
 */
enum BaStatus ba_system_feasible(const struct BaSystem *sys,
                                 enum BaArithmetic arithmetic,
                                 int32_t *feasible);

/**
 * Applies the product rule. On success `*reduced` receives the reduced
 * system, or null with `*proved_infeasible = 1` when presolve finds a
 * contradiction.
 *
 * # Safety
 * `sys` must be a live handle; `reduced` and `proved_infeasible` valid for
 * writing.
 */
enum BaStatus ba_system_presolve(const struct BaSystem *sys,
                                 struct BaSystem **reduced,
                                 int32_t *proved_infeasible);

/**
 * Runs the bit-fixing procedure on the decimal integer `c`.
 *
 * # Safety
 * `c` must be a nul-terminated string and `out` valid for writing.
 */
enum BaStatus ba_factor(const char *c, enum BaArithmetic arithmetic, struct BaFactorResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BAYES_ARITH_H */
