#ifndef FGGPPL_H
#define FGGPPL_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every call.
 */
typedef enum FggpplStatus {
  FGGPPL_STATUS_OK = 0,
  FGGPPL_STATUS_NULL_ARGUMENT = 1,
  FGGPPL_STATUS_INVALID_UTF8 = 2,
  /*
   Syntax, scope, domain or parameter error in a program.
   */
  FGGPPL_STATUS_FRONTEND = 3,
  /*
   Malformed or invalid grammar JSON.
   */
  FGGPPL_STATUS_INVALID_GRAMMAR = 4,
  /*
   Weights exceeded the divergence bound; the partial result is returned.
   */
  FGGPPL_STATUS_DIVERGENT = 5,
  /*
   The iteration limit was reached; the last iterate is returned.
   */
  FGGPPL_STATUS_NOT_CONVERGED = 6,
  FGGPPL_STATUS_OUT_OF_RANGE = 7,
  FGGPPL_STATUS_PANIC = 8,
} FggpplStatus;

/*
 A compiled or loaded grammar.
 */
typedef struct FggpplGrammar FggpplGrammar;

/*
 A weight table over the start symbol's attachment domains.
 */
typedef struct FggpplTensor FggpplTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the most recent failure on this thread. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *fggppl_last_error(void);

/*
 Compiles `source` under `params_json` (may be null). `passes` is a bit
 set: 1 prune, 2 inline, 4 compose, 8 contract.

 # Safety
 `source` and a non-null `params_json` must be NUL-terminated strings;
 `out` must be writable.
 */
enum FggpplStatus fggppl_compile(const char *source,
                                 const char *params_json,
                                 uint8_t passes,
                                 struct FggpplGrammar **out);

/*
 Parses and validates a grammar in the JSON interchange format.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum FggpplStatus fggppl_grammar_from_json(const char *json, struct FggpplGrammar **out);

/*
 Serializes a grammar; release the string with [`fggppl_string_free`].

 # Safety
 `g` must come from this library; `out` must be writable.
 */
enum FggpplStatus fggppl_grammar_to_json(const struct FggpplGrammar *g, char **out);

/*
 # Safety
 `g` must come from this library; `out` must be writable.
 */
enum FggpplStatus fggppl_grammar_rule_count(const struct FggpplGrammar *g, uintptr_t *out);

/*
 Solves for the start symbol. On `Divergent` and `NotConverged` the last
 iterate is still stored in `out`. `iterations` may be null.

 # Safety
 `g` must come from this library; `out` must be writable.
 */
enum FggpplStatus fggppl_infer(const struct FggpplGrammar *g,
                               double tol,
                               uintptr_t max_iter,
                               struct FggpplTensor **out,
                               uintptr_t *iterations);

/*
 Number of entries.

 # Safety
 `t` must come from this library; `out` must be writable.
 */
enum FggpplStatus fggppl_tensor_len(const struct FggpplTensor *t, uintptr_t *out);

/*
 Entry `index` in row-major order.

 # Safety
 `t` must come from this library; `out` must be writable.
 */
enum FggpplStatus fggppl_tensor_get(const struct FggpplTensor *t, uintptr_t index, double *out);

/*
 Entries with their value tuples as a JSON array of `{"values": [...], "weight": w}`.

 # Safety
 `t` must come from this library; `out` must be writable.
 */
enum FggpplStatus fggppl_tensor_to_json(const struct FggpplTensor *t, char **out);

/*
 # Safety
 `g` must be null or come from this library, and not be used afterwards.
 */
void fggppl_grammar_free(struct FggpplGrammar *g);

/*
 # Safety
 `t` must be null or come from this library, and not be used afterwards.
 */
void fggppl_tensor_free(struct FggpplTensor *t);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void fggppl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FGGPPL_H */
