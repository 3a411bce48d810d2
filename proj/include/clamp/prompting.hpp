#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clamp/splits.hpp"

namespace clamp::prompting {

struct ContextMode {
  enum class Family { kDialogue, kSql };
  enum class Turns { kNone, kLastAgent, kLastUserAndAgent, kLastInteraction, kAllInteractions };

  Family family = Family::kDialogue;
  Turns turns = Turns::kNone;
  bool db_values = false;

  // Dialogue: none, last_agent, last_user_and_agent.
  // SQL: sql_none, last_interaction, all_interactions, each optionally with a
  // "+values" suffix to render sample database values.
  static ContextMode parse(std::string_view name);
  std::string name() const;
};

// Dialogue: `l | a | u`, `a | u` or `u`. SQL: `c , d , u` where c is the
// previous utterance(s) joined by ` | ` (omitted when there are none) and d
// the rendered schema.
std::string render_input(const splits::DatasetExample& ex, const ContextMode& mode);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct Ranked {
  std::size_t index;
  double score;
};

// Lower-cased whitespace terms.
std::vector<std::string> bm25_terms(std::string_view text);

/// Okapi BM25 over a fixed pool of documents.
///
///   idf(t)      = ln(1 + (N - n_t + 0.5) / (n_t + 0.5))
///   score(q, d) = sum over query terms t of
///                 idf(t) * f(t,d) * (k1 + 1) / (f(t,d) + k1 * (1 - b + b * |d| / avgdl))
///
/// Repeated query terms contribute once per occurrence.
class Bm25Index {
 public:
  explicit Bm25Index(std::span<const std::string> pool, Bm25Params params = {});

  double score(std::string_view query, std::size_t doc) const;
  // Descending score; ties keep pool order.
  std::vector<Ranked> rank(std::string_view query) const;
  double idf(std::string_view term) const;
  std::size_t size() const { return docs_.size(); }

 private:
  struct Doc {
    std::vector<std::pair<std::string, std::size_t>> tf;  // sorted by term
    std::size_t length = 0;
  };
  std::size_t tf(const Doc& d, std::string_view term) const;

  Bm25Params params_;
  std::vector<Doc> docs_;
  std::vector<std::pair<std::string, std::size_t>> df_;  // sorted by term
  double avgdl_ = 0.0;
};

std::vector<Ranked> bm25_rank(std::string_view query, std::span<const std::string> pool,
                              Bm25Params params = {});

struct PromptExample {
  std::string uc;  // rendered context and utterance
  std::string p;   // gold parse
  double relevance = 0.0;
};

enum class Order { kRandom, kBestFirst, kBestLast };
Order parse_order(std::string_view name);

using TokenCounter = std::function<std::size_t(std::string_view)>;
std::size_t whitespace_token_count(std::string_view text);

inline constexpr std::string_view kPromptHeader =
    "Let's translate what a human user says into what a computer might say.";

struct PromptOptions {
  Order order = Order::kBestLast;
  std::size_t budget = 1500;
  std::size_t max_examples = 20;
  std::uint64_t seed = 0;  // for Order::kRandom
  TokenCounter counter = whitespace_token_count;
};

struct Prompt {
  std::string text;
  // Indices into the input examples, in the order they appear.
  std::vector<std::size_t> included;
};

/// Header, then one `Human: / Computer:` block per example, then the target
/// block ending in `Computer:`. Examples are admitted by descending relevance
/// while the prompt stays within budget (at most max_examples), then laid out
/// per `order`; best_last puts the most relevant example next to the target.
/// Throws kInvalidArgument when even the zero-example prompt exceeds budget.
Prompt build_prompt(std::span<const PromptExample> examples, std::string_view target,
                    const PromptOptions& options = {});

}  // namespace clamp::prompting
