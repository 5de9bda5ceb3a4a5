/* C interface to libprimtrace. All functions return a pt_status; on failure
 * pt_last_error_message() describes the most recent error on this thread.
 * Handles are opaque and owned by the caller once created. */
#ifndef PRIMTRACE_H
#define PRIMTRACE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef PRIMTRACE_BUILDING
#    define PT_API __declspec(dllexport)
#  else
#    define PT_API __declspec(dllimport)
#  endif
#else
#  define PT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pt_status {
  PT_OK = 0,
  PT_ERR_PARSE = 1,
  PT_ERR_INTEGRITY = 2,
  PT_ERR_LOOKUP = 3,
  PT_ERR_PARAMETER = 4,
  PT_ERR_ALIGNMENT = 5,
  PT_ERR_DATA = 6,
  PT_ERR_STRUCTURE = 7,
  PT_ERR_IO = 8,
  PT_ERR_USAGE = 9,
  PT_ERR_INTERNAL = 100
} pt_status;

PT_API const char* pt_status_name(pt_status status);
/* Empty string when the last call on this thread succeeded. */
PT_API const char* pt_last_error_message(void);
PT_API const char* pt_version(void);

/* Corpus */
typedef struct pt_corpus pt_corpus;

PT_API pt_status pt_corpus_load(const char* path, pt_corpus** out);
PT_API pt_status pt_corpus_parse(const char* text, size_t len, pt_corpus** out);
PT_API void pt_corpus_free(pt_corpus* corpus);
PT_API pt_status pt_corpus_record_count(const pt_corpus* corpus, size_t* out);
PT_API pt_status pt_corpus_checkpoint_count(const pt_corpus* corpus,
                                            size_t* out);
PT_API pt_status pt_corpus_save(const pt_corpus* corpus, const char* path);

/* Run configuration. Keys are the long CLI flag names without dashes. */
typedef struct pt_config pt_config;

PT_API pt_status pt_config_new(pt_config** out);
PT_API void pt_config_free(pt_config* cfg);
PT_API pt_status pt_config_set(pt_config* cfg, const char* key,
                               const char* value);
PT_API pt_status pt_run(const char* subcommand, const pt_config* cfg);
PT_API int pt_is_subcommand(const char* name);

/* Segmentation */
typedef struct pt_spans pt_spans;

typedef struct pt_span {
  size_t start;
  size_t end;
  size_t est_tokens;
} pt_span;

PT_API size_t pt_estimate_tokens(const char* text, size_t len);
/* min/max/tail of 0 select the defaults. */
PT_API pt_status pt_segment(const char* block, size_t len, size_t min_tokens,
                            size_t max_tokens, size_t tail_tokens,
                            pt_spans** out);
PT_API size_t pt_spans_count(const pt_spans* spans);
PT_API pt_status pt_spans_get(const pt_spans* spans, size_t i, pt_span* out);
PT_API void pt_spans_free(pt_spans* spans);

/* Primitive labels are passed as small integers in this order:
 * 0 PLAN, 1 SETUP, 2 ENUMERATE, 3 HYPOTHESIZE, 4 COMPUTE, 5 CHECK,
 * 6 BACKTRACK, 7 SUMMARIZE, 8 OTHER. */
PT_API pt_status pt_classify(const char* span, size_t span_len,
                             const char* preceding, size_t preceding_len,
                             int* out);
PT_API pt_status pt_primitive_name(int label, const char** out);
PT_API pt_status pt_chain_depth(const int* labels, size_t n, int no_setup,
                                size_t* out);

/* Statistics */
PT_API pt_status pt_pass_at_k(int64_t n, int64_t c, int64_t k, double* out);
PT_API pt_status pt_mann_whitney_u(const double* x, size_t nx, const double* y,
                                   size_t ny, double* u, double* p,
                                   int* exact);
PT_API pt_status pt_bootstrap_ci(const double* values, size_t n, double level,
                                 size_t iterations, uint64_t seed, double* lo,
                                 double* hi);

/* Novelty. mask may be NULL (all tokens valid); nonzero entries are valid. */
PT_API pt_status pt_topk_nll_score(const double* nlls, const unsigned char* mask,
                                   size_t n, size_t k, double* out);

/* Puzzles and rewards */
typedef struct pt_puzzle pt_puzzle;

typedef struct pt_reward {
  double exact;
  double completion;
  double format;
  double novelty;
  double total;
} pt_reward;

PT_API pt_status pt_puzzle_parse(const char* json_line, pt_puzzle** out);
PT_API void pt_puzzle_free(pt_puzzle* puzzle);
/* rows: newline separated board. ok gets 1/0; diagnostic (may be NULL)
 * stays valid until the next call on this thread. */
PT_API pt_status pt_puzzle_verify(const pt_puzzle* puzzle, const char* rows,
                                  int* ok, const char** diagnostic);
PT_API pt_status pt_puzzle_base_reward(const pt_puzzle* puzzle,
                                       const char* response, pt_reward* out);
PT_API pt_status pt_format_reward(const char* response, size_t len,
                                  double* out);

#ifdef __cplusplus
}
#endif

#endif /* PRIMTRACE_H */
