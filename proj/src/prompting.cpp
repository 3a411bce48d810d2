#include "clamp/prompting.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "clamp/error.hpp"
#include "clamp/random.hpp"

namespace clamp::prompting {

ContextMode ContextMode::parse(std::string_view name) {
  ContextMode m;
  std::string_view base = name;
  constexpr std::string_view kValues = "+values";
  if (base.size() > kValues.size() && base.substr(base.size() - kValues.size()) == kValues) {
    m.db_values = true;
    base.remove_suffix(kValues.size());
  }
  using T = Turns;
  if (!m.db_values && base == "none") return m;
  if (!m.db_values && base == "last_agent") m.turns = T::kLastAgent;
  else if (!m.db_values && base == "last_user_and_agent") m.turns = T::kLastUserAndAgent;
  else if (base == "sql_none") m.family = Family::kSql;
  else if (base == "last_interaction") m.family = Family::kSql, m.turns = T::kLastInteraction;
  else if (base == "all_interactions") m.family = Family::kSql, m.turns = T::kAllInteractions;
  else throw Error(ErrorCode::kInvalidArgument, "unknown context mode '" + std::string(name) + "'");
  return m;
}

std::string ContextMode::name() const {
  std::string n;
  switch (turns) {
    case Turns::kNone: n = family == Family::kSql ? "sql_none" : "none"; break;
    case Turns::kLastAgent: n = "last_agent"; break;
    case Turns::kLastUserAndAgent: n = "last_user_and_agent"; break;
    case Turns::kLastInteraction: n = "last_interaction"; break;
    case Turns::kAllInteractions: n = "all_interactions"; break;
  }
  if (db_values) n += "+values";
  return n;
}

std::string render_input(const splits::DatasetExample& ex, const ContextMode& mode) {
  using T = ContextMode::Turns;
  if (mode.family == ContextMode::Family::kDialogue) {
    switch (mode.turns) {
      case T::kLastAgent: return ex.last_agent_utt + " | " + ex.utterance;
      case T::kLastUserAndAgent: return ex.last_user_utt + " | " + ex.last_agent_utt + " | " + ex.utterance;
      default: return ex.utterance;
    }
  }
  if (!ex.schema) throw Error(ErrorCode::kData, "example '" + ex.id + "' has no schema for an SQL context mode");
  std::string out;
  const auto& prior = ex.prior_interactions;
  if (!prior.empty() && mode.turns == T::kLastInteraction) {
    out = prior.back() + " , ";
  } else if (!prior.empty() && mode.turns == T::kAllInteractions) {
    for (std::size_t i = 0; i < prior.size(); ++i) out += (i ? " | " : "") + prior[i];
    out += " , ";
  }
  out += sql::render_schema(*ex.schema, mode.db_values);
  out += " , ";
  out += ex.utterance;
  return out;
}

// ---------------------------------------------------------------------------
// BM25

std::vector<std::string> bm25_terms(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace {

std::size_t lookup(const std::vector<std::pair<std::string, std::size_t>>& table, std::string_view term) {
  auto it = std::lower_bound(table.begin(), table.end(), term,
                             [](const auto& e, std::string_view t) { return e.first < t; });
  return it != table.end() && it->first == term ? it->second : 0;
}

}  // namespace

Bm25Index::Bm25Index(std::span<const std::string> pool, Bm25Params params) : params_(params) {
  if (pool.empty()) throw Error(ErrorCode::kInvalidArgument, "BM25 pool is empty");
  std::map<std::string, std::size_t> df;
  std::size_t total = 0;
  for (const auto& text : pool) {
    std::map<std::string, std::size_t> tf;
    auto terms = bm25_terms(text);
    for (auto& t : terms) ++tf[t];
    for (const auto& [t, n] : tf) ++df[t];
    Doc d;
    d.length = terms.size();
    d.tf.assign(tf.begin(), tf.end());
    total += d.length;
    docs_.push_back(std::move(d));
  }
  df_.assign(df.begin(), df.end());
  avgdl_ = static_cast<double>(total) / static_cast<double>(docs_.size());
}

std::size_t Bm25Index::tf(const Doc& d, std::string_view term) const { return lookup(d.tf, term); }

double Bm25Index::idf(std::string_view term) const {
  const double n = static_cast<double>(lookup(df_, term));
  const double N = static_cast<double>(docs_.size());
  return std::log(1.0 + (N - n + 0.5) / (n + 0.5));
}

double Bm25Index::score(std::string_view query, std::size_t doc) const {
  const Doc& d = docs_.at(doc);
  const double norm = avgdl_ > 0.0 ? static_cast<double>(d.length) / avgdl_ : 0.0;
  double s = 0.0;
  for (const auto& t : bm25_terms(query)) {
    const double f = static_cast<double>(tf(d, t));
    if (f == 0.0) continue;
    s += idf(t) * f * (params_.k1 + 1.0) / (f + params_.k1 * (1.0 - params_.b + params_.b * norm));
  }
  return s;
}

std::vector<Ranked> Bm25Index::rank(std::string_view query) const {
  std::vector<Ranked> out;
  out.reserve(docs_.size());
  for (std::size_t i = 0; i < docs_.size(); ++i) out.push_back({i, score(query, i)});
  std::stable_sort(out.begin(), out.end(), [](const Ranked& a, const Ranked& b) { return a.score > b.score; });
  return out;
}

std::vector<Ranked> bm25_rank(std::string_view query, std::span<const std::string> pool, Bm25Params params) {
  return Bm25Index(pool, params).rank(query);
}

// ---------------------------------------------------------------------------
// Prompts

Order parse_order(std::string_view name) {
  if (name == "random") return Order::kRandom;
  if (name == "best_first") return Order::kBestFirst;
  if (name == "best_last") return Order::kBestLast;
  throw Error(ErrorCode::kInvalidArgument, "unknown example order '" + std::string(name) + "'");
}

std::size_t whitespace_token_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

namespace {

std::string assemble(std::span<const PromptExample> examples, std::span<const std::size_t> order,
                     std::string_view target) {
  std::string out(kPromptHeader);
  out += "\n\n";
  for (std::size_t i : order) {
    out += "Human: " + examples[i].uc + "\n";
    out += "Computer: " + examples[i].p + "\n\n";
  }
  out += "Human: ";
  out += target;
  out += "\nComputer:";
  return out;
}

}  // namespace

Prompt build_prompt(std::span<const PromptExample> examples, std::string_view target,
                    const PromptOptions& options) {
  const TokenCounter& count = options.counter ? options.counter : TokenCounter(whitespace_token_count);
  if (count(assemble(examples, {}, target)) > options.budget)
    throw Error(ErrorCode::kInvalidArgument, "token budget " + std::to_string(options.budget) +
                                                 " cannot fit the header and target");

  std::vector<std::size_t> by_relevance(examples.size());
  std::iota(by_relevance.begin(), by_relevance.end(), 0);
  std::stable_sort(by_relevance.begin(), by_relevance.end(), [&](std::size_t a, std::size_t b) {
    return examples[a].relevance > examples[b].relevance;
  });

  std::vector<std::size_t> chosen;  // most relevant first
  for (std::size_t i : by_relevance) {
    if (chosen.size() >= options.max_examples) break;
    chosen.push_back(i);
    if (count(assemble(examples, chosen, target)) > options.budget) {
      chosen.pop_back();
      break;
    }
  }

  std::vector<std::size_t> layout = chosen;
  switch (options.order) {
    case Order::kBestFirst: break;
    case Order::kBestLast: std::reverse(layout.begin(), layout.end()); break;
    case Order::kRandom: {
      SplitMix64 rng(options.seed);
      fisher_yates(std::span<std::size_t>(layout), rng);
      break;
    }
  }
  // A counter that is not additive over blocks could see the reordered
  // prompt as longer; shed the least relevant examples until it fits.
  while (!chosen.empty() && count(assemble(examples, layout, target)) > options.budget) {
    std::size_t drop = chosen.back();
    chosen.pop_back();
    layout.erase(std::find(layout.begin(), layout.end(), drop));
  }
  return {assemble(examples, layout, target), layout};
}

}  // namespace clamp::prompting
