#ifndef LPI_H
#define LPI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  LPI_DOMAIN_INTERVALS = 0,
  LPI_DOMAIN_OCTAGONS = 1,
  LPI_DOMAIN_RICH = 2,
} LpiDomain;

typedef enum {
  LPI_STATUS_OK = 0,
  LPI_STATUS_NULL_POINTER = 1,
  LPI_STATUS_INVALID_UTF8 = 2,
  LPI_STATUS_PARSE_ERROR = 3,
  LPI_STATUS_INVALID_ARGUMENT = 4,
  LPI_STATUS_ANALYSIS_ERROR = 5,
  LPI_STATUS_PANIC = 6,
} LpiStatus;

/**
 * A finished analysis.
 */
typedef struct LpiAnalysis LpiAnalysis;

/**
 * Analysis settings; starts as intervals, exact integers, no unrolling.
 */
typedef struct LpiOptions LpiOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *lpi_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lpi_version(void);

LpiOptions *lpi_options_new(void);

/**
 * # Safety
 * `opts` must be null or a pointer from [`lpi_options_new`] not yet freed.
 */
void lpi_options_free(LpiOptions *opts);

/**
 * # Safety
 * `opts` must be a live options handle.
 */
LpiStatus lpi_options_set_domain(LpiOptions *opts, LpiDomain domain);

/**
 * # Safety
 * `opts` must be a live options handle.
 */
LpiStatus lpi_options_set_unroll(LpiOptions *opts, uint32_t depth);

/**
 * # Safety
 * `opts` must be a live options handle.
 */
LpiStatus lpi_options_set_congruence(LpiOptions *opts, bool on);

/**
 * Rational relaxation instead of exact integer reasoning.
 *
 * # Safety
 * `opts` must be a live options handle.
 */
LpiStatus lpi_options_set_relaxed(LpiOptions *opts, bool on);

/**
 * Walk the refinement ladder instead of running one configuration.
 *
 * # Safety
 * `opts` must be a live options handle.
 */
LpiStatus lpi_options_set_refine(LpiOptions *opts, bool on);

/**
 * Turns off one of `input-independence`, `syntactic-skip`,
 * `redundant-lemma`.
 *
 * # Safety
 * `opts` must be a live options handle and `name` a NUL-terminated string.
 */
LpiStatus lpi_options_disable_heuristic(LpiOptions *opts, const char *name);

/**
 * Analyzes a program given as source text. `opts` may be null for the
 * defaults. On success `*out` receives a handle to free with
 * [`lpi_analysis_free`].
 *
 * # Safety
 * `source` must be a NUL-terminated string, `opts` null or a live options
 * handle, and `out` a valid pointer.
 */
LpiStatus lpi_analyze(const char *source, const LpiOptions *opts, LpiAnalysis **out);

/**
 * # Safety
 * `a` must be null or a handle from [`lpi_analyze`] not yet freed.
 */
void lpi_analysis_free(LpiAnalysis *a);

/**
 * Whether the analysis finished and proved every assertion.
 *
 * # Safety
 * `a` must be a live analysis handle.
 */
bool lpi_analysis_all_proved(const LpiAnalysis *a);

/**
 * # Safety
 * `a` must be a live analysis handle.
 */
size_t lpi_analysis_assertion_count(const LpiAnalysis *a);

/**
 * Source line and verdict of the `index`-th assertion.
 *
 * # Safety
 * `a` must be a live analysis handle; `line` and `proved` valid pointers.
 */
LpiStatus lpi_analysis_assertion(const LpiAnalysis *a, size_t index, uint32_t *line, bool *proved);

/**
 * The full report as JSON. Release with [`lpi_string_free`].
 *
 * # Safety
 * `a` must be a live analysis handle.
 */
char *lpi_analysis_json(const LpiAnalysis *a);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void lpi_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LPI_H */
