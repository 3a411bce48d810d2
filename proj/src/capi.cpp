#include "clamp/clamp.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include <json.hpp>

#include "clamp/decoder.hpp"
#include "clamp/earley.hpp"
#include "clamp/error.hpp"
#include "clamp/grammar.hpp"
#include "clamp/induction.hpp"
#include "clamp/io.hpp"
#include "clamp/prompting.hpp"
#include "clamp/sexp.hpp"
#include "clamp/splits.hpp"
#include "clamp/sql.hpp"
#include "clamp/tokens.hpp"

using nlohmann::json;

struct clamp_grammar {
  std::shared_ptr<const clamp::Grammar> g;
};

struct clamp_state {
  clamp::PrefixState s;
};

struct clamp_vocab {
  std::shared_ptr<const clamp::TokenTrie> trie;
};

namespace {

thread_local std::string g_last_error;

clamp_status status_of(clamp::ErrorCode code) {
  using clamp::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return CLAMP_ERR_INVALID_ARGUMENT;
    case ErrorCode::kSyntax: return CLAMP_ERR_SYNTAX;
    case ErrorCode::kUndefinedNonterminal: return CLAMP_ERR_UNDEFINED_NONTERMINAL;
    case ErrorCode::kDuplicateStart: return CLAMP_ERR_DUPLICATE_START;
    case ErrorCode::kEmptyLanguage: return CLAMP_ERR_EMPTY_LANGUAGE;
    case ErrorCode::kExplosion: return CLAMP_ERR_EXPLOSION;
    case ErrorCode::kRejected: return CLAMP_ERR_REJECTED;
    case ErrorCode::kDisallowedToken: return CLAMP_ERR_DISALLOWED_TOKEN;
    case ErrorCode::kType: return CLAMP_ERR_TYPE;
    case ErrorCode::kIo: return CLAMP_ERR_IO;
    case ErrorCode::kData: return CLAMP_ERR_DATA;
    case ErrorCode::kNoViableHypothesis: return CLAMP_ERR_NO_VIABLE_HYPOTHESIS;
    case ErrorCode::kScorer: return CLAMP_ERR_SCORER;
    case ErrorCode::kNotSupported: return CLAMP_ERR_NOT_SUPPORTED;
  }
  return CLAMP_ERR_INTERNAL;
}

clamp_status fail(clamp_status st, std::string msg) {
  g_last_error = std::move(msg);
  return st;
}

// Runs f, translating exceptions into a status and the thread's last error.
template <typename F>
clamp_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return CLAMP_OK;
  } catch (const clamp::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const json::exception& e) {
    return fail(CLAMP_ERR_INVALID_ARGUMENT, std::string("json: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(CLAMP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CLAMP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CLAMP_ERR_INTERNAL, "unknown exception");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw clamp::Error(clamp::ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

clamp_grammar* wrap(clamp::Grammar g) {
  return new clamp_grammar{std::make_shared<const clamp::Grammar>(std::move(g))};
}

json parse_json_arg(const char* text, const char* what) {
  if (!text || !*text) return json::object();
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw clamp::Error(clamp::ErrorCode::kInvalidArgument, std::string(what) + ": " + e.what());
  }
}

clamp::decoding::DecodeConfig decode_config(const json& j) {
  clamp::decoding::DecodeConfig cfg;
  cfg.beam_size = j.value("beam", cfg.beam_size);
  cfg.max_tokens = j.value("max_tokens", cfg.max_tokens);
  cfg.constrained = j.value("constrained", cfg.constrained);
  std::string length = j.value("length", "none");
  if (length == "normalize") cfg.length = clamp::decoding::LengthHandling::kNormalize;
  else if (length != "none") throw clamp::Error(clamp::ErrorCode::kInvalidArgument, "unknown length handling '" + length + "'");
  cfg.validate();
  return cfg;
}

std::string results_json(const std::vector<clamp::decoding::DecodeResult>& results) {
  json out = json::array();
  for (const auto& r : results)
    out.push_back({{"text", r.text},
                   {"tokens", r.tokens},
                   {"logprob", r.logprob},
                   {"score", r.score},
                   {"finished", r.finished}});
  return out.dump();
}

class UniformScorer final : public clamp::decoding::Scorer {
 public:
  explicit UniformScorer(std::size_t n) : n_(n) {}
  std::size_t vocab_size() const override { return n_; }
  std::vector<double> score(std::string_view, std::span<const clamp::TokenId>) const override {
    return std::vector<double>(n_, 0.0);
  }

 private:
  std::size_t n_;
};

class CallbackScorer final : public clamp::decoding::Scorer {
 public:
  CallbackScorer(clamp_scorer_fn fn, void* user, std::size_t n) : fn_(fn), user_(user), n_(n) {}
  std::size_t vocab_size() const override { return n_; }
  std::vector<double> score(std::string_view conditioning, std::span<const clamp::TokenId> prefix) const override {
    std::vector<double> out(n_, 0.0);
    std::string cond(conditioning);
    if (fn_(user_, cond.c_str(), prefix.data(), prefix.size(), out.data(), n_) != 0)
      throw clamp::Error(clamp::ErrorCode::kScorer, "scorer callback reported failure");
    return out;
  }

 private:
  clamp_scorer_fn fn_;
  void* user_;
  std::size_t n_;
};

std::unique_ptr<clamp::decoding::Scorer> make_scorer(const json& spec, const clamp::TokenTrie& trie) {
  const std::size_t n = trie.vocabulary().size();
  const std::string kind = spec.value("kind", "uniform");
  if (kind == "uniform") return std::make_unique<UniformScorer>(n);
  if (kind == "http") {
    auto timeout = std::chrono::milliseconds(spec.value("timeout_ms", 30000));
    return std::make_unique<clamp::decoding::HttpScorer>(spec.at("url").get<std::string>(), n, timeout);
  }
  if (kind != "ngram") throw clamp::Error(clamp::ErrorCode::kInvalidArgument, "unknown scorer kind '" + kind + "'");

  auto corpus = spec.at("corpus").get<std::vector<std::string>>();
  auto contexts = spec.value("contexts", std::vector<std::string>{});
  if (!contexts.empty() && contexts.size() != corpus.size())
    throw clamp::Error(clamp::ErrorCode::kInvalidArgument, "contexts and corpus differ in length");
  if (corpus.empty()) throw clamp::Error(clamp::ErrorCode::kInvalidArgument, "n-gram corpus is empty");
  auto ng = std::make_unique<clamp::decoding::NgramScorer>(n, spec.value("order", std::size_t{3}));
  const clamp::TokenId eos = trie.vocabulary().eos();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto target = clamp::tokenize_greedy(trie, corpus[i]);
    target.push_back(eos);
    std::vector<clamp::TokenId> ctx;
    if (!contexts.empty()) ctx = clamp::tokenize_greedy(trie, contexts[i]);
    ng->add(target, ctx);
  }
  if (!contexts.empty()) {
    ng->set_context_encoder([&trie](std::string_view s) { return clamp::tokenize_greedy(trie, s); });
  }
  return ng;
}

const char* split_name_or_null(const char* s) { return s && *s ? s : nullptr; }

}  // namespace

extern "C" {

const char* clamp_version(void) { return "0.1.0"; }

const char* clamp_last_error(void) { return g_last_error.c_str(); }

const char* clamp_status_name(clamp_status status) {
  switch (status) {
    case CLAMP_OK: return "ok";
    case CLAMP_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case CLAMP_ERR_SYNTAX: return "syntax";
    case CLAMP_ERR_UNDEFINED_NONTERMINAL: return "undefined_nonterminal";
    case CLAMP_ERR_DUPLICATE_START: return "duplicate_start";
    case CLAMP_ERR_EMPTY_LANGUAGE: return "empty_language";
    case CLAMP_ERR_EXPLOSION: return "explosion";
    case CLAMP_ERR_REJECTED: return "rejected";
    case CLAMP_ERR_DISALLOWED_TOKEN: return "disallowed_token";
    case CLAMP_ERR_TYPE: return "type";
    case CLAMP_ERR_IO: return "io";
    case CLAMP_ERR_DATA: return "data";
    case CLAMP_ERR_NO_VIABLE_HYPOTHESIS: return "no_viable_hypothesis";
    case CLAMP_ERR_SCORER: return "scorer";
    case CLAMP_ERR_NOT_SUPPORTED: return "not_supported";
    case CLAMP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void clamp_string_free(char* s) { std::free(s); }

// ---- grammars --------------------------------------------------------------

clamp_status clamp_grammar_parse(const char* text, clamp_grammar** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = nullptr;
    *out = wrap(clamp::parse_grammar(text));
  });
}

clamp_status clamp_grammar_load(const char* path, clamp_grammar** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = nullptr;
    *out = wrap(clamp::reduce(clamp::parse_grammar(clamp::io::read_file(path))));
  });
}

clamp_status clamp_grammar_reduce(const clamp_grammar* g, clamp_grammar** out) {
  return guarded([&] {
    require(g && out, "null argument");
    *out = nullptr;
    *out = wrap(clamp::reduce(*g->g));
  });
}

clamp_status clamp_grammar_serialize(const clamp_grammar* g, char** out) {
  return guarded([&] {
    require(g && out, "null argument");
    *out = dup_string(clamp::serialize_grammar(*g->g));
  });
}

size_t clamp_grammar_production_count(const clamp_grammar* g) { return g ? g->g->productions().size() : 0; }

void clamp_grammar_free(clamp_grammar* g) { delete g; }

clamp_status clamp_grammar_enumerate(const clamp_grammar* g, size_t max_len, char** json_out) {
  return guarded([&] {
    require(g && json_out, "null argument");
    json arr = json::array();
    for (const auto& s : clamp::enumerate_language(*g->g, max_len)) arr.push_back(s);
    *json_out = dup_string(arr.dump());
  });
}

// ---- prefix recognition ----------------------------------------------------

clamp_status clamp_state_new(const clamp_grammar* g, clamp_state** out) {
  return guarded([&] {
    require(g && out, "null argument");
    *out = nullptr;
    *out = new clamp_state{clamp::PrefixState::initial(g->g)};
  });
}

clamp_status clamp_state_advance(const clamp_state* s, const char* bytes, size_t len, clamp_state** out,
                                 size_t* rejected_at) {
  return guarded([&] {
    require(s && out && (bytes || len == 0), "null argument");
    *out = nullptr;
    clamp::PrefixState cur = s->s;
    for (size_t i = 0; i < len; ++i) {
      auto next = cur.advance(static_cast<unsigned char>(bytes[i]));
      if (!next) {
        if (rejected_at) *rejected_at = i;
        throw clamp::Error(clamp::ErrorCode::kRejected, "rejected at offset " + std::to_string(i));
      }
      cur = std::move(*next);
    }
    *out = new clamp_state{std::move(cur)};
  });
}

int clamp_state_is_complete(const clamp_state* s) { return s && s->s.is_complete() ? 1 : 0; }

size_t clamp_state_consumed(const clamp_state* s) { return s ? s->s.consumed() : 0; }

void clamp_state_allowed_chars(const clamp_state* s, uint8_t allowed[256]) {
  if (!allowed) return;
  std::memset(allowed, 0, 256);
  if (!s) return;
  s->s.allowed_next_chars().for_each([&](unsigned char c) { allowed[c] = 1; });
}

void clamp_state_free(clamp_state* s) { delete s; }

// ---- vocabularies ----------------------------------------------------------

clamp_status clamp_vocab_load(const char* path, clamp_vocab** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = nullptr;
    *out = new clamp_vocab{std::make_shared<const clamp::TokenTrie>(clamp::io::load_vocabulary(path))};
  });
}

clamp_status clamp_vocab_parse(const char* jsonl, clamp_vocab** out) {
  return guarded([&] {
    require(jsonl && out, "null argument");
    *out = nullptr;
    *out = new clamp_vocab{std::make_shared<const clamp::TokenTrie>(clamp::io::parse_vocabulary(jsonl))};
  });
}

size_t clamp_vocab_size(const clamp_vocab* v) { return v ? v->trie->vocabulary().size() : 0; }

int32_t clamp_vocab_eos(const clamp_vocab* v) { return v ? v->trie->vocabulary().eos() : -1; }

void clamp_vocab_free(clamp_vocab* v) { delete v; }

clamp_status clamp_allowed_tokens(const clamp_state* s, const clamp_vocab* v, int32_t* ids, size_t capacity,
                                  size_t* count) {
  return guarded([&] {
    require(s && v && count && (ids || capacity == 0), "null argument");
    auto mask = clamp::allowed_tokens(s->s, *v->trie);
    *count = mask.ids.size();
    for (size_t i = 0; i < mask.ids.size() && i < capacity; ++i) ids[i] = mask.ids[i];
  });
}

clamp_status clamp_state_advance_token(const clamp_state* s, const clamp_vocab* v, int32_t id, clamp_state** out) {
  return guarded([&] {
    require(s && v && out, "null argument");
    *out = nullptr;
    *out = new clamp_state{clamp::advance_token(s->s, *v->trie, id)};
  });
}

// ---- decoding --------------------------------------------------------------

clamp_status clamp_decode(const clamp_grammar* g, const clamp_vocab* v, const char* scorer_json,
                          const char* config_json, const char* conditioning, char** results_json_out) {
  return guarded([&] {
    require(g && v && results_json_out, "null argument");
    *results_json_out = nullptr;
    auto cfg = decode_config(parse_json_arg(config_json, "decode config"));
    auto scorer = make_scorer(parse_json_arg(scorer_json, "scorer"), *v->trie);
    auto results = clamp::decoding::decode(*scorer, g->g, *v->trie, cfg, conditioning ? conditioning : "");
    *results_json_out = dup_string(results_json(results));
  });
}

clamp_status clamp_decode_with_scorer(const clamp_grammar* g, const clamp_vocab* v, clamp_scorer_fn scorer,
                                      void* user, const char* config_json, const char* conditioning,
                                      char** results_json_out) {
  return guarded([&] {
    require(g && v && scorer && results_json_out, "null argument");
    *results_json_out = nullptr;
    auto cfg = decode_config(parse_json_arg(config_json, "decode config"));
    CallbackScorer cb(scorer, user, v->trie->vocabulary().size());
    auto results = clamp::decoding::decode(cb, g->g, *v->trie, cfg, conditioning ? conditioning : "");
    *results_json_out = dup_string(results_json(results));
  });
}

// ---- induction and SQL -----------------------------------------------------

clamp_status clamp_induce_grammar(const char* format, const char* programs_json, const char* signatures_path,
                                  const char* root_type, clamp_grammar** out) {
  return guarded([&] {
    require(format && programs_json && out, "null argument");
    *out = nullptr;
    auto programs = json::parse(programs_json).get<std::vector<std::string>>();
    std::string fmt = format;
    if (fmt == "mtop") {
      std::vector<clamp::induction::MtopNode> trees;
      for (const auto& p : programs) trees.push_back(clamp::induction::parse_mtop(p));
      *out = wrap(clamp::induction::induce_mtop_grammar(trees));
      return;
    }
    require(fmt == "lispress", "format must be lispress or mtop");
    require(signatures_path && *signatures_path, "lispress induction needs a signatures file");
    auto sigs = clamp::io::load_signatures(signatures_path);
    std::optional<std::string> root;
    if (root_type && *root_type) root = root_type;
    std::vector<clamp::induction::TypedExpression> typed;
    for (const auto& p : programs) typed.push_back(clamp::induction::type_check(clamp::sexp::parse(p), sigs, root));
    *out = wrap(clamp::induction::induce_lispress_grammar(typed, sigs, root));
  });
}

clamp_status clamp_specialize_sql(const clamp_grammar* base, const char* schema_json, clamp_grammar** out) {
  return guarded([&] {
    require(base && schema_json && out, "null argument");
    *out = nullptr;
    *out = wrap(clamp::sql::specialize_sql_grammar(*base->g, clamp::io::parse_schema(schema_json)));
  });
}

clamp_status clamp_render_schema(const char* schema_json, int with_values, char** out) {
  return guarded([&] {
    require(schema_json && out, "null argument");
    *out = dup_string(clamp::sql::render_schema(clamp::io::parse_schema(schema_json), with_values != 0));
  });
}

// ---- Lispress --------------------------------------------------------------

clamp_status clamp_lispress_canonical(const char* text, char** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = dup_string(clamp::sexp::canonical(clamp::sexp::parse(text)));
  });
}

clamp_status clamp_lispress_equal(const char* a, const char* b, int* equal, int* parse_failed) {
  return guarded([&] {
    require(a && b && equal, "null argument");
    bool failed = false;
    *equal = clamp::sexp::lispress_equal(a, b, &failed) ? 1 : 0;
    if (parse_failed) *parse_failed = failed ? 1 : 0;
  });
}

// ---- datasets, splits, metrics, prompts ------------------------------------

clamp_status clamp_dataset_golds(const char* dataset_path, const char* split, char** json_out) {
  return guarded([&] {
    require(dataset_path && json_out, "null argument");
    const char* only = split_name_or_null(split);
    json arr = json::array();
    for (const auto& ex : clamp::io::load_dataset(dataset_path))
      if (!only || ex.split == only) arr.push_back(ex.gold);
    *json_out = dup_string(arr.dump());
  });
}

clamp_status clamp_make_splits(const char* dataset_path, int has_public_test, uint64_t seed, char** manifest_json) {
  return guarded([&] {
    require(dataset_path && manifest_json, "null argument");
    auto data = clamp::io::load_dataset(dataset_path);
    clamp::splits::SplitOptions opts;
    opts.has_public_test = has_public_test != 0;
    opts.seed = seed;
    *manifest_json = dup_string(clamp::splits::manifest_json(clamp::splits::make_splits(data, opts)));
  });
}

clamp_status clamp_evaluate(const char* predictions_path, const char* dataset_path, const char* metric,
                            char** report_json) {
  return guarded([&] {
    require(predictions_path && dataset_path && metric && report_json, "null argument");
    auto m = clamp::splits::parse_metric(metric);
    auto preds = clamp::io::load_predictions(predictions_path);
    auto gold = clamp::io::load_dataset(dataset_path);
    *report_json = dup_string(clamp::splits::report_json(clamp::splits::evaluate(preds, gold, m)));
  });
}

clamp_status clamp_aggregate_low(const char* accuracies_json, char** out) {
  return guarded([&] {
    require(accuracies_json && out, "null argument");
    auto acc = json::parse(accuracies_json).get<std::vector<double>>();
    require(acc.size() == 3, "aggregate_low needs exactly three accuracies");
    auto agg = clamp::splits::aggregate_low(std::span<const double, 3>(acc.data(), 3));
    *out = dup_string(json{{"mean", agg.mean}, {"stddev", agg.stddev}}.dump());
  });
}

clamp_status clamp_build_prompt(const char* request_json, char** out) {
  using namespace clamp::prompting;
  return guarded([&] {
    require(request_json && out, "null argument");
    json req = json::parse(request_json);
    auto pool = clamp::io::load_dataset(req.at("pool").get<std::string>());
    auto mode = ContextMode::parse(req.value("context_mode", "none"));

    const json& q = req.at("query");
    std::string target;
    std::string query_id;
    if (q.contains("id")) {
      query_id = q.at("id").is_string() ? q.at("id").get<std::string>() : q.at("id").dump();
      auto source = req.contains("query_dataset")
                        ? clamp::io::load_dataset(req.at("query_dataset").get<std::string>())
                        : pool;
      auto it = std::find_if(source.begin(), source.end(), [&](const auto& ex) { return ex.id == query_id; });
      if (it == source.end()) throw clamp::Error(clamp::ErrorCode::kData, "no example with id '" + query_id + "'");
      target = render_input(*it, mode);
    } else {
      target = q.at("utterance").get<std::string>();
    }

    // The query never retrieves itself.
    std::vector<const clamp::splits::DatasetExample*> members;
    std::vector<std::string> rendered;
    for (const auto& ex : pool) {
      if (!query_id.empty() && ex.id == query_id) continue;
      members.push_back(&ex);
      rendered.push_back(render_input(ex, mode));
    }
    if (members.empty()) throw clamp::Error(clamp::ErrorCode::kData, "retrieval pool is empty");

    Bm25Params params;
    params.k1 = req.value("k1", params.k1);
    params.b = req.value("b", params.b);
    PromptOptions opts;
    opts.order = parse_order(req.value("order", "best_last"));
    opts.budget = req.value("budget", opts.budget);
    opts.max_examples = req.value("max_examples", opts.max_examples);
    opts.seed = req.value("seed", opts.seed);

    auto ranked = bm25_rank(target, rendered, params);
    std::vector<PromptExample> examples;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < ranked.size() && i < opts.max_examples; ++i) {
      examples.push_back({rendered[ranked[i].index], members[ranked[i].index]->gold, ranked[i].score});
      ids.push_back(members[ranked[i].index]->id);
    }
    auto prompt = build_prompt(examples, target, opts);
    json included = json::array();
    for (auto i : prompt.included) included.push_back(ids[i]);
    *out = dup_string(json{{"prompt", prompt.text}, {"n_examples", prompt.included.size()}, {"example_ids", included}}.dump());
  });
}

}  // extern "C"
