/* C interface to the session-type subtyping library.
 *
 * Every object handed out by this API is an opaque handle owned by the
 * caller and released with the matching *_free function. Strings returned
 * through char** out-parameters are heap copies released with
 * sesub_string_free. Handles are immutable after creation, so one handle
 * may be shared between threads; the error message slot is thread-local.
 */
#ifndef SESUB_H
#define SESUB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#if defined(SESUB_BUILD)
#define SESUB_API __declspec(dllexport)
#else
#define SESUB_API __declspec(dllimport)
#endif
#else
#define SESUB_API __attribute__((visibility("default")))
#endif

typedef struct sesub_type sesub_type; /* a closed session type */
typedef struct sesub_qm sesub_qm;     /* a queue machine */
typedef struct sesub_cfsm sesub_cfsm; /* a communicating automaton */

typedef enum sesub_status {
  SESUB_OK = 0,
  SESUB_ERR_PARSE = 1,    /* input text violates a format or an invariant */
  SESUB_ERR_IO = 2,       /* file cannot be opened or read */
  SESUB_ERR_FRAGMENT = 3, /* pair outside the fragment decide() accepts */
  SESUB_ERR_LIMIT = 4,    /* an exploration ceiling was hit */
  SESUB_ERR_INVALID = 5,  /* null handle or out-of-range argument */
  SESUB_ERR_INTERNAL = 6,
} sesub_status;

/* Message describing the most recent failing call on this thread. Never
 * NULL; empty before the first failure. The pointer stays valid until the
 * next failing call on the same thread. */
SESUB_API const char* sesub_last_error(void);

SESUB_API void sesub_string_free(char* s);

SESUB_API const char* sesub_version(void);

/* ---- session types ------------------------------------------------- */

SESUB_API sesub_status sesub_type_parse(const char* text, sesub_type** out);
SESUB_API sesub_status sesub_type_load(const char* path, sesub_type** out);
SESUB_API void sesub_type_free(sesub_type* t);

/* Canonical textual form; parses back to an equal type. */
SESUB_API sesub_status sesub_type_render(const sesub_type* t, char** out);

/* Classification bits. "Single output" means every internal choice has
 * exactly one branch, "single input" likewise for external choices, and
 * "input guarded" means every recursion unfolds through at least one
 * external choice. */
#define SESUB_CLASS_SINGLE_OUTPUT (1u << 0)
#define SESUB_CLASS_SINGLE_INPUT (1u << 1)
#define SESUB_CLASS_INPUT_GUARDED (1u << 2)

SESUB_API sesub_status sesub_type_classify(const sesub_type* t,
                                           uint32_t* out_bits);

/* ---- subtype checks ------------------------------------------------- */

typedef enum sesub_algo {
  SESUB_ALGO_SEMI = 0,   /* sound and complete, may diverge (fuel-bounded) */
  SESUB_ALGO_DECIDE = 1, /* terminating, fragment inputs only */
  SESUB_ALGO_ORACLE = 2, /* bounded game exploration, may be inconclusive */
} sesub_algo;

typedef enum sesub_verdict {
  SESUB_SUBTYPE = 0,
  SESUB_NOT_SUBTYPE = 1,
  SESUB_FUEL_EXHAUSTED = 2,
  SESUB_INCONCLUSIVE = 3,
} sesub_verdict;

/* Verdict as the word the command line prints ("subtype", ...). */
SESUB_API const char* sesub_verdict_name(sesub_verdict v);

typedef struct sesub_check_options {
  sesub_algo algo;
  /* SEMI: rule-application budget (0 picks the default of 100000).
   * DECIDE: safety ceiling on rule applications, 0 means none.
   * ORACLE: bound on distinct game pairs (0 picks the default). */
  uint64_t fuel;
  /* Trace lines are delivered to this callback in application order,
   * "<rule> | <left> | <right> | <env size>", at most trace_limit of them
   * (0 picks the default). Leave NULL to skip trace collection. */
  void (*trace)(const char* line, void* user);
  void* user;
  size_t trace_limit;
} sesub_check_options;

typedef struct sesub_check_result {
  sesub_verdict verdict;
  uint64_t rule_applications; /* ORACLE: 0 */
  uint64_t sigma_max;         /* largest environment seen; ORACLE: 0 */
  uint64_t pairs;             /* distinct pairs visited */
} sesub_check_result;

/* Checks sub <= sup. opt may be NULL for the defaults (SEMI, default
 * fuel, no trace). DECIDE on a pair outside its fragment fails with
 * SESUB_ERR_FRAGMENT and leaves *out untouched. */
SESUB_API sesub_status sesub_check(const sesub_type* sub,
                                   const sesub_type* sup,
                                   const sesub_check_options* opt,
                                   sesub_check_result* out);

/* Sets *out_ok to 1 when decide() accepts the pair. Otherwise *out_ok is 0
 * and *out_reason (when non-NULL) receives the reason. */
SESUB_API sesub_status sesub_fragment_check(const sesub_type* sub,
                                            const sesub_type* sup,
                                            int* out_ok, char** out_reason);

/* ---- queue machines ------------------------------------------------- */

SESUB_API sesub_status sesub_qm_parse(const char* text, sesub_qm** out);
SESUB_API sesub_status sesub_qm_load(const char* path, sesub_qm** out);
SESUB_API void sesub_qm_free(sesub_qm* m);

/* The built-in four-state machine accepting { a^n b^n | n >= 0 }. */
SESUB_API sesub_status sesub_qm_anbn(sesub_qm** out);

typedef struct sesub_run_result {
  int accepted;   /* nonzero: the queue emptied within the budget */
  uint64_t steps; /* transitions taken */
} sesub_run_result;

/* Runs the machine on the input word (symbols concatenated, "" for the
 * empty word) for at most max_steps transitions. Each configuration,
 * starting one first, is reported to the callback as "(state,queue)" when
 * it is non-NULL. last, when non-NULL, receives the final configuration. */
SESUB_API sesub_status sesub_qm_run(const sesub_qm* m, const char* input,
                                    uint64_t max_steps,
                                    void (*config)(const char* line,
                                                   void* user),
                                    void* user, sesub_run_result* out,
                                    char** last);

/* Encoding of a queue holding the given word (which may be ""). */
SESUB_API sesub_status sesub_qm_encode_queue(const sesub_qm* m,
                                             const char* content,
                                             sesub_type** out);

/* Encoding of the control structure from the start state. */
SESUB_API sesub_status sesub_qm_encode_control(const sesub_qm* m,
                                               sesub_type** out);

/* The pair (control encoding, queue encoding of input plus the initial
 * symbol) whose subtype check fails exactly when the machine accepts. */
SESUB_API sesub_status sesub_qm_reduction(const sesub_qm* m,
                                          const char* input,
                                          sesub_type** out_sub,
                                          sesub_type** out_sup);

/* ---- communicating automata ----------------------------------------- */

/* Explores the terms reachable from t. max_states of 0 picks the default
 * ceiling; exceeding the ceiling fails with SESUB_ERR_LIMIT. */
SESUB_API sesub_status sesub_cfsm_build(const sesub_type* t,
                                        size_t max_states, sesub_cfsm** out);
SESUB_API void sesub_cfsm_free(sesub_cfsm* g);

SESUB_API sesub_status sesub_cfsm_state_count(const sesub_cfsm* g,
                                              size_t* out);
SESUB_API sesub_status sesub_cfsm_transition_count(const sesub_cfsm* g,
                                                   size_t* out);

/* Graphviz rendering; byte-identical across runs for equal inputs. */
SESUB_API sesub_status sesub_cfsm_to_dot(const sesub_cfsm* g, char** out);

#ifdef __cplusplus
}
#endif

#endif /* SESUB_H */
