#ifndef WK_H
#define WK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Largest expression, counted as a tree, that [`wk_expr_to_string`] renders.
 */
#define WK_MAX_NODES 1000000

typedef enum WkSemiring {
  WK_SEMIRING_BOOLEAN = 0,
  WK_SEMIRING_NATURALS = 1,
  WK_SEMIRING_INTEGERS = 2,
  WK_SEMIRING_RATIONALS = 3,
} WkSemiring;

typedef enum WkStatus {
  WK_STATUS_OK = 0,
  WK_STATUS_NULL_ARGUMENT = 1,
  WK_STATUS_INVALID_UTF8 = 2,
  WK_STATUS_SYNTAX = 3,
  WK_STATUS_DOMAIN = 4,
  WK_STATUS_CAPABILITY = 5,
  WK_STATUS_PROOF = 6,
  WK_STATUS_OTHER = 7,
  WK_STATUS_PANIC = 8,
  WK_STATUS_TOO_LARGE = 9,
} WkStatus;

/**
 * A weighted automaton.
 */
typedef struct WkAutomaton WkAutomaton;

/**
 * A μ-expression together with its semiring.
 */
typedef struct WkExpr WkExpr;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message of the last failed call on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *wk_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void wk_string_free(char *s);

/**
 * Parses an automaton in the text format.
 *
 * # Safety
 * `src` must be a valid C string; `out` a valid pointer.
 */
enum WkStatus wk_automaton_parse(const char *src, struct WkAutomaton **out);

/**
 * # Safety
 * `aut` must be null or a handle from this library, freed once.
 */
void wk_automaton_free(struct WkAutomaton *aut);

/**
 * Number of states, or 0 for a null handle.
 *
 * # Safety
 * `aut` must be null or a live handle.
 */
size_t wk_automaton_num_states(const struct WkAutomaton *aut);

/**
 * Weight of `word` from configuration `start` (e.g. `{s0:1}`), as text.
 *
 * # Safety
 * Pointers must be valid; `out` receives a string for [`wk_string_free`].
 */
enum WkStatus wk_automaton_eval(const struct WkAutomaton *aut,
                                const char *start,
                                const char *word,
                                char **out);

/**
 * Canonical text (`as_dot` false) or Graphviz DOT (`as_dot` true).
 *
 * # Safety
 * Pointers must be valid; `out` receives a string for [`wk_string_free`].
 */
enum WkStatus wk_automaton_render(const struct WkAutomaton *aut, bool as_dot, char **out);

/**
 * Decides language equivalence of two configurations. On a difference,
 * `witness` (if non-null) receives `"<word> <left> <right>"`.
 *
 * # Safety
 * Pointers must be valid; `witness` may be null.
 */
enum WkStatus wk_automaton_equiv(const struct WkAutomaton *left,
                                 const char *left_start,
                                 const struct WkAutomaton *right,
                                 const char *right_start,
                                 bool *equivalent,
                                 char **witness_out);

/**
 * Expression for a named state by elimination of the state variables.
 *
 * # Safety
 * Pointers must be valid; `out` receives a handle for [`wk_expr_free`].
 */
enum WkStatus wk_automaton_to_expr(const struct WkAutomaton *aut,
                                   const char *state,
                                   struct WkExpr **out);

/**
 * Parses an expression; open expressions are allowed.
 *
 * # Safety
 * `src` must be a valid C string; `out` a valid pointer.
 */
enum WkStatus wk_expr_parse(const char *src, enum WkSemiring semiring, struct WkExpr **out);

/**
 * # Safety
 * `e` must be null or a handle from this library, freed once.
 */
void wk_expr_free(struct WkExpr *e);

/**
 * Surface text of the expression, normalized if `canonical`. Fails with
 * [`WkStatus::TooLarge`] past [`WK_MAX_NODES`] nodes written out.
 *
 * # Safety
 * Pointers must be valid; `out` receives a string for [`wk_string_free`].
 */
enum WkStatus wk_expr_to_string(const struct WkExpr *e, bool canonical, char **out);

/**
 * Weight of `word` under a closed expression. `alphabet` (letters separated
 * by spaces) may be null, in which case the letters of `e` are used.
 *
 * # Safety
 * Pointers must be valid except `alphabet`, which may be null.
 */
enum WkStatus wk_expr_eval(const struct WkExpr *e,
                           const char *alphabet,
                           const char *word,
                           char **out);

/**
 * Automaton of the derivatives of `e`; its start state is `q0`.
 *
 * # Safety
 * Pointers must be valid except `alphabet`, which may be null.
 */
enum WkStatus wk_expr_to_automaton(const struct WkExpr *e,
                                   const char *alphabet,
                                   struct WkAutomaton **out);

/**
 * Decides language equivalence of two closed expressions over the same
 * semiring. On a difference, `witness` (if non-null) receives
 * `"<word> <left> <right>"`.
 *
 * # Safety
 * `alphabet` and `witness_out` may be null; other pointers must be valid.
 */
enum WkStatus wk_expr_equiv(const struct WkExpr *e1,
                            const struct WkExpr *e2,
                            const char *alphabet,
                            bool *equivalent,
                            char **witness_out);

/**
 * Checks a derivation script and, if `audit_len > 0`, audits it on all
 * words up to that length. A rejected derivation returns `Proof`;
 * `trace_out` (if non-null) receives the replay trace on success.
 *
 * # Safety
 * `script` must be a valid C string; `trace_out` may be null.
 */
enum WkStatus wk_check_proof(const char *script, size_t audit_len, char **trace_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WK_H */
