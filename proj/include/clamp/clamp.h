/*
 * C interface to the clamp grammar-constrained decoding toolkit.
 *
 * Objects are opaque handles created by *_new / *_load / *_parse functions
 * and released with the matching *_free. Functions return a clamp_status;
 * on failure clamp_last_error() describes the problem for the calling
 * thread. Strings handed out through char** parameters are owned by the
 * caller and released with clamp_string_free().
 *
 * Handles are immutable once built (states advance into new handles) and may
 * be shared between threads.
 */
#ifndef CLAMP_CLAMP_H
#define CLAMP_CLAMP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define CLAMP_API __declspec(dllexport)
#else
#  define CLAMP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum clamp_status {
  CLAMP_OK = 0,
  CLAMP_ERR_INVALID_ARGUMENT = 1,
  CLAMP_ERR_SYNTAX = 2,
  CLAMP_ERR_UNDEFINED_NONTERMINAL = 3,
  CLAMP_ERR_DUPLICATE_START = 4,
  CLAMP_ERR_EMPTY_LANGUAGE = 5,
  CLAMP_ERR_EXPLOSION = 6,
  CLAMP_ERR_REJECTED = 7,
  CLAMP_ERR_DISALLOWED_TOKEN = 8,
  CLAMP_ERR_TYPE = 9,
  CLAMP_ERR_IO = 10,
  CLAMP_ERR_DATA = 11,
  CLAMP_ERR_NO_VIABLE_HYPOTHESIS = 12,
  CLAMP_ERR_SCORER = 13,
  CLAMP_ERR_NOT_SUPPORTED = 14,
  CLAMP_ERR_INTERNAL = 15
} clamp_status;

typedef struct clamp_grammar clamp_grammar;
typedef struct clamp_state clamp_state;
typedef struct clamp_vocab clamp_vocab;

CLAMP_API const char* clamp_version(void);
/* Message for the last failing call on this thread; "" if none. */
CLAMP_API const char* clamp_last_error(void);
/* Stable lower-case name of a status, e.g. "empty_language". */
CLAMP_API const char* clamp_status_name(clamp_status status);
CLAMP_API void clamp_string_free(char* s);

/* ---- grammars ---------------------------------------------------------- */

/* Parses grammar text. The result is not reduced. */
CLAMP_API clamp_status clamp_grammar_parse(const char* text, clamp_grammar** out);
/* Reads, parses and reduces a grammar file. */
CLAMP_API clamp_status clamp_grammar_load(const char* path, clamp_grammar** out);
CLAMP_API clamp_status clamp_grammar_reduce(const clamp_grammar* g, clamp_grammar** out);
CLAMP_API clamp_status clamp_grammar_serialize(const clamp_grammar* g, char** out);
CLAMP_API size_t clamp_grammar_production_count(const clamp_grammar* g);
CLAMP_API void clamp_grammar_free(clamp_grammar* g);

/* Writes every member of the language up to max_len bytes as a JSON array. */
CLAMP_API clamp_status clamp_grammar_enumerate(const clamp_grammar* g, size_t max_len, char** json_out);

/* ---- prefix recognition ------------------------------------------------ */

CLAMP_API clamp_status clamp_state_new(const clamp_grammar* g, clamp_state** out);
/* Advances over len bytes. On rejection returns CLAMP_ERR_REJECTED, leaves
 * *out NULL and stores the offset of the first rejected byte in
 * *rejected_at (if non-NULL). */
CLAMP_API clamp_status clamp_state_advance(const clamp_state* s, const char* bytes, size_t len,
                                           clamp_state** out, size_t* rejected_at);
CLAMP_API int clamp_state_is_complete(const clamp_state* s);
CLAMP_API size_t clamp_state_consumed(const clamp_state* s);
/* allowed[c] = 1 for every byte c that may follow the prefix. */
CLAMP_API void clamp_state_allowed_chars(const clamp_state* s, uint8_t allowed[256]);
CLAMP_API void clamp_state_free(clamp_state* s);

/* ---- vocabularies and token masks -------------------------------------- */

CLAMP_API clamp_status clamp_vocab_load(const char* path, clamp_vocab** out);
CLAMP_API clamp_status clamp_vocab_parse(const char* jsonl, clamp_vocab** out);
CLAMP_API size_t clamp_vocab_size(const clamp_vocab* v);
CLAMP_API int32_t clamp_vocab_eos(const clamp_vocab* v);
CLAMP_API void clamp_vocab_free(clamp_vocab* v);

/* Legal next tokens in ascending id order. Writes up to capacity ids and
 * the full count to *count. */
CLAMP_API clamp_status clamp_allowed_tokens(const clamp_state* s, const clamp_vocab* v, int32_t* ids,
                                            size_t capacity, size_t* count);
CLAMP_API clamp_status clamp_state_advance_token(const clamp_state* s, const clamp_vocab* v, int32_t id,
                                                 clamp_state** out);

/* ---- decoding ---------------------------------------------------------- */

/* Fills scores[0..vocab_size) with log-scores for the next token. Returns 0
 * on success; any other value aborts decoding with CLAMP_ERR_SCORER. */
typedef int (*clamp_scorer_fn)(void* user, const char* conditioning, const int32_t* prefix,
                               size_t prefix_len, double* scores, size_t vocab_size);

/* config_json: {"beam": 5, "max_tokens": 256, "constrained": true,
 *               "length": "none" | "normalize"}  (all optional)
 * scorer_json selects a built-in scorer:
 *   {"kind": "ngram", "order": 3, "corpus": [strings], "contexts": [strings]}
 *       trains an add-one n-gram on the greedy tokenization of each corpus
 *       string plus eos, conditioned on the matching context string when
 *       given;
 *   {"kind": "uniform"};
 *   {"kind": "http", "url": "http://host:port/path", "timeout_ms": 30000}.
 * Results: JSON array of {"text", "tokens", "logprob", "score", "finished"}. */
CLAMP_API clamp_status clamp_decode(const clamp_grammar* g, const clamp_vocab* v, const char* scorer_json,
                                    const char* config_json, const char* conditioning, char** results_json);
CLAMP_API clamp_status clamp_decode_with_scorer(const clamp_grammar* g, const clamp_vocab* v,
                                                clamp_scorer_fn scorer, void* user, const char* config_json,
                                                const char* conditioning, char** results_json);

/* ---- grammar induction and SQL specialization -------------------------- */

/* format: "lispress" (needs a signatures file) or "mtop". programs_json is a
 * JSON array of program strings. root_type may be NULL. */
CLAMP_API clamp_status clamp_induce_grammar(const char* format, const char* programs_json,
                                            const char* signatures_path, const char* root_type,
                                            clamp_grammar** out);
CLAMP_API clamp_status clamp_specialize_sql(const clamp_grammar* base, const char* schema_json,
                                            clamp_grammar** out);
CLAMP_API clamp_status clamp_render_schema(const char* schema_json, int with_values, char** out);

/* ---- Lispress ---------------------------------------------------------- */

CLAMP_API clamp_status clamp_lispress_canonical(const char* text, char** out);
/* *equal = 1 when both parse to the same tree. A parse failure on either
 * side gives *equal = 0 and *parse_failed = 1. */
CLAMP_API clamp_status clamp_lispress_equal(const char* a, const char* b, int* equal, int* parse_failed);

/* ---- datasets, splits, metrics, prompts -------------------------------- */

/* Dataset file as a JSON array of its gold strings, optionally restricted
 * to one source split ("train", "dev", "test"; NULL for all). */
CLAMP_API clamp_status clamp_dataset_golds(const char* dataset_path, const char* split, char** json_out);
CLAMP_API clamp_status clamp_make_splits(const char* dataset_path, int has_public_test, uint64_t seed,
                                         char** manifest_json);
/* metric: "exact" or "lispress". */
CLAMP_API clamp_status clamp_evaluate(const char* predictions_path, const char* dataset_path,
                                      const char* metric, char** report_json);
/* accuracies_json: array of three numbers. Output {"mean": m, "stddev": s}. */
CLAMP_API clamp_status clamp_aggregate_low(const char* accuracies_json, char** out);
/* request_json: {"pool": dataset path, "query": {"id": ...} | {"utterance": ...},
 *                "query_dataset": path (when query has id),
 *                "context_mode": "none", "order": "best_last", "budget": 1500,
 *                "max_examples": 20, "seed": 0, "k1": 1.2, "b": 0.75}
 * Output {"prompt": text, "n_examples": n, "example_ids": [...]}. */
CLAMP_API clamp_status clamp_build_prompt(const char* request_json, char** out);

#ifdef __cplusplus
}
#endif

#endif /* CLAMP_CLAMP_H */
