/* C interface for the simrel finite-system toolkit. */

#ifndef SIMREL_H
#define SIMREL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Relation type selectors for `sr_check_relation`.
typedef enum SrRelationType {
  SR_ASR = 0,
  SR_ASRB = 1,
  SR_ASRBB = 2,
  SR_MCR = 3,
  SR_FRR = 4,
} SrRelationType;

// Status codes returned by every entry point.
typedef enum SrStatus {
  SR_OK = 0,
  SR_NULL_ARGUMENT = 1,
  SR_INVALID_UTF8 = 2,
  SR_PARSE_ERROR = 3,
  SR_INVALID_ARGUMENT = 4,
  SR_INFEASIBLE = 5,
  SR_INTERNAL_ERROR = 6,
} SrStatus;

// Opaque handle to a binary relation between two systems' state spaces.
typedef struct SrRelation SrRelation;

// Opaque handle to a finite simple system.
typedef struct SrSystem SrSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message for this thread; valid until the next failing call.
// The pointer must not be freed.
const char *sr_last_error_message(void);

// Parses a simple system from its JSON form into a new handle.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum SrStatus sr_system_from_json(const char *json, struct SrSystem **out);

// Releases a system handle. Null is ignored.
//
// # Safety
// `sys` must be a pointer from `sr_system_from_json`, not yet freed.
void sr_system_free(struct SrSystem *sys);

// Number of states of the system.
//
// # Safety
// `sys` and `out` must be valid pointers.
enum SrStatus sr_system_num_states(const struct SrSystem *sys, size_t *out);

// Parses a relation given as `{"pairs": [[l1, l2], ...]}` against the state
// labels of the two systems.
//
// # Safety
// All pointers must be valid; `json` NUL-terminated.
enum SrStatus sr_relation_from_json(const char *json,
                                    const struct SrSystem *s1,
                                    const struct SrSystem *s2,
                                    struct SrRelation **out);

// Releases a relation handle. Null is ignored.
//
// # Safety
// `rel` must be a pointer from `sr_relation_from_json`, not yet freed.
void sr_relation_free(struct SrRelation *rel);

// Checks one relation type; `holds` receives 1 or 0.
//
// # Safety
// All pointers must be valid.
enum SrStatus sr_check_relation(const struct SrSystem *s1,
                                const struct SrSystem *s2,
                                const struct SrRelation *rel,
                                enum SrRelationType relation_type,
                                int32_t *holds);

// Runs all five relation checks and returns the report map as JSON.
//
// # Safety
// All pointers must be valid; free the result with `sr_string_free`.
enum SrStatus sr_classify_json(const struct SrSystem *s1,
                               const struct SrSystem *s2,
                               const struct SrRelation *rel,
                               char **out_json);

// Synthesizes a safety (`bound < 0`) or bounded-reach (`bound >= 0`)
// controller over the given state labels and returns its JSON dump.
// Fails with `SrInfeasible` when no controller exists.
//
// # Safety
// All pointers must be valid; `states_json` is a JSON array of labels;
// free the result with `sr_string_free`.
enum SrStatus sr_synthesize_json(const struct SrSystem *sys,
                                 const char *states_json,
                                 int64_t bound,
                                 char **out_json);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed already.
void sr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIMREL_H */
