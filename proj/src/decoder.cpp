#include "clamp/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "clamp/error.hpp"

namespace clamp::decoding {

void DecodeConfig::validate() const {
  if (beam_size < 1) throw Error(ErrorCode::kInvalidArgument, "beam size must be at least 1");
  if (max_tokens < 1) throw Error(ErrorCode::kInvalidArgument, "max tokens must be at least 1");
}

namespace {

struct Candidate {
  std::size_t parent;
  TokenId token;
  double logprob;
};

// Lexicographic order of parent.tokens + token. Active hypotheses all have
// the same length.
bool token_path_less(const std::vector<TokenId>& a, TokenId ta, const std::vector<TokenId>& b, TokenId tb) {
  if (a != b) return a < b;
  return ta < tb;
}

double ranking_score(const Hypothesis& h, LengthHandling length) {
  if (length == LengthHandling::kNormalize && !h.tokens.empty())
    return h.logprob / static_cast<double>(h.tokens.size());
  return h.logprob;
}

std::vector<double> checked_scores(const Scorer& scorer, std::string_view conditioning,
                                   std::span<const TokenId> prefix, std::size_t vocab_size) {
  std::vector<double> scores = scorer.score(conditioning, prefix);
  if (scores.size() != vocab_size)
    throw Error(ErrorCode::kScorer, "scorer returned " + std::to_string(scores.size()) +
                                        " scores for a vocabulary of " + std::to_string(vocab_size));
  for (double s : scores)
    if (!std::isfinite(s)) throw Error(ErrorCode::kScorer, "scorer returned a non-finite score");
  return scores;
}

std::vector<DecodeResult> finalize(std::vector<Hypothesis> hyps, const Vocabulary& vocab,
                                   const DecodeConfig& cfg) {
  std::vector<DecodeResult> out;
  out.reserve(hyps.size());
  for (auto& h : hyps) {
    DecodeResult r;
    std::span<const TokenId> body(h.tokens);
    if (h.finished) body = body.first(body.size() - 1);
    r.text = detokenize(vocab, body);
    r.score = ranking_score(h, cfg.length);
    r.logprob = h.logprob;
    r.finished = h.finished;
    r.tokens = std::move(h.tokens);
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(), [](const DecodeResult& a, const DecodeResult& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tokens < b.tokens;
  });
  if (out.size() > cfg.beam_size) out.resize(cfg.beam_size);
  return out;
}

}  // namespace

std::vector<DecodeResult> decode(const Scorer& scorer, const std::shared_ptr<const Grammar>& grammar,
                                 const TokenTrie& trie, const DecodeConfig& cfg,
                                 std::string_view conditioning, const StepObserver& observer) {
  cfg.validate();
  const Vocabulary& vocab = trie.vocabulary();
  if (scorer.vocab_size() != vocab.size())
    throw Error(ErrorCode::kInvalidArgument, "scorer and vocabulary sizes differ");

  std::vector<Hypothesis> active(1);
  if (cfg.constrained) active[0].state = PrefixState::initial(grammar);
  std::vector<Hypothesis> finished;

  for (std::size_t step = 0; step < cfg.max_tokens && !active.empty(); ++step) {
    std::vector<Candidate> candidates;
    std::vector<TokenMask> masks(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
      const Hypothesis& h = active[i];
      const std::vector<double> scores = checked_scores(scorer, conditioning, h.tokens, vocab.size());
      if (cfg.constrained) {
        masks[i] = allowed_tokens(*h.state, trie);
        for (TokenId id : masks[i].ids)
          candidates.push_back({i, id, h.logprob + scores[static_cast<std::size_t>(id)]});
      } else {
        for (std::size_t id = 0; id < vocab.size(); ++id)
          candidates.push_back({i, static_cast<TokenId>(id), h.logprob + scores[id]});
      }
    }

    const std::size_t keep = std::min(cfg.beam_size, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), [&](const Candidate& a, const Candidate& b) {
                        if (a.logprob != b.logprob) return a.logprob > b.logprob;
                        return token_path_less(active[a.parent].tokens, a.token, active[b.parent].tokens,
                                               b.token);
                      });

    std::vector<Hypothesis> next;
    for (std::size_t k = 0; k < keep; ++k) {
      const Candidate& c = candidates[k];
      const Hypothesis& parent = active[c.parent];
      if (observer) observer(parent, c.token, cfg.constrained ? &masks[c.parent] : nullptr);
      Hypothesis h;
      h.tokens = parent.tokens;
      h.tokens.push_back(c.token);
      h.logprob = c.logprob;
      if (c.token == vocab.eos()) {
        h.finished = true;
        finished.push_back(std::move(h));
        continue;
      }
      if (cfg.constrained) h.state = advance_token(*parent.state, trie, c.token);
      next.push_back(std::move(h));
    }
    active = std::move(next);
  }

  if (!finished.empty()) return finalize(std::move(finished), vocab, cfg);
  if (cfg.constrained) {
    if (active.empty())
      throw Error(ErrorCode::kNoViableHypothesis,
                  "constrained beam emptied before any hypothesis finished");
    throw Error(ErrorCode::kNoViableHypothesis,
                "no hypothesis finished within " + std::to_string(cfg.max_tokens) + " tokens");
  }
  return finalize(std::move(active), vocab, cfg);
}

// ---------------------------------------------------------------------------

NgramScorer::NgramScorer(std::size_t vocab_size, std::size_t order)
    : vocab_size_(vocab_size), order_(order) {
  if (order < 1 || order > 5) throw Error(ErrorCode::kInvalidArgument, "n-gram order must be in [1, 5]");
  if (vocab_size == 0) throw Error(ErrorCode::kInvalidArgument, "empty vocabulary");
}

std::vector<TokenId> NgramScorer::history_key(std::span<const TokenId> context,
                                              std::span<const TokenId> prefix) const {
  const std::size_t n = order_ - 1;
  std::vector<TokenId> key(n, kPad);
  // Fill from the right: prefix first, then context, then padding.
  std::size_t filled = 0;
  for (std::size_t i = prefix.size(); i > 0 && filled < n; --i, ++filled) key[n - 1 - filled] = prefix[i - 1];
  for (std::size_t i = context.size(); i > 0 && filled < n; --i, ++filled) key[n - 1 - filled] = context[i - 1];
  return key;
}

void NgramScorer::add(std::span<const TokenId> target, std::span<const TokenId> context) {
  for (std::size_t i = 0; i < target.size(); ++i) {
    const TokenId t = target[i];
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_size_)
      throw Error(ErrorCode::kInvalidArgument, "token id " + std::to_string(t) + " out of range");
    Counts& c = counts_[history_key(context, target.first(i))];
    ++c.total;
    ++c.next[t];
  }
}

double NgramScorer::log_prob(std::span<const TokenId> history, TokenId next) const {
  auto it = counts_.find(history_key({}, history));
  std::size_t total = 0, hit = 0;
  if (it != counts_.end()) {
    total = it->second.total;
    auto n = it->second.next.find(next);
    if (n != it->second.next.end()) hit = n->second;
  }
  return std::log(static_cast<double>(hit + 1) / static_cast<double>(total + vocab_size_));
}

std::vector<double> NgramScorer::score(std::string_view conditioning, std::span<const TokenId> prefix) const {
  std::vector<TokenId> context;
  if (encoder_) context = encoder_(conditioning);
  auto it = counts_.find(history_key(context, prefix));
  std::size_t total = it == counts_.end() ? 0 : it->second.total;
  const double denom = static_cast<double>(total + vocab_size_);
  std::vector<double> out(vocab_size_, std::log(1.0 / denom));
  if (it != counts_.end())
    for (const auto& [tok, n] : it->second.next)
      out[static_cast<std::size_t>(tok)] = std::log(static_cast<double>(n + 1) / denom);
  return out;
}

NgramScorer train_ngram(const std::vector<std::vector<TokenId>>& corpus, std::size_t order,
                        std::size_t vocab_size) {
  if (corpus.empty()) throw Error(ErrorCode::kInvalidArgument, "empty n-gram training corpus");
  NgramScorer s(vocab_size, order);
  for (const auto& seq : corpus) s.add(seq);
  return s;
}

}  // namespace clamp::decoding
