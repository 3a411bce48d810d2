#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clamp/earley.hpp"
#include "clamp/tokens.hpp"

namespace clamp::decoding {

/// Next-token scorer. score() returns one finite log-score per vocabulary
/// id and must be deterministic for fixed inputs. A scorer shared between
/// threads must tolerate concurrent calls.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual std::vector<double> score(std::string_view conditioning,
                                    std::span<const TokenId> prefix) const = 0;
};

enum class LengthHandling { kNone, kNormalize };

struct DecodeConfig {
  std::size_t beam_size = 5;
  std::size_t max_tokens = 256;
  bool constrained = true;
  LengthHandling length = LengthHandling::kNone;

  void validate() const;
};

struct Hypothesis {
  std::vector<TokenId> tokens;
  double logprob = 0.0;
  // Chart after replaying `tokens`; empty in unconstrained decoding.
  std::optional<PrefixState> state;
  bool finished = false;
};

struct DecodeResult {
  std::string text;  // detokenized, without eos
  std::vector<TokenId> tokens;
  double logprob = 0.0;
  double score = 0.0;  // ranking score after length handling
  bool finished = false;
};

// Called once per hypothesis admitted to the next beam, with its parent, the
// chosen token, and the mask the parent was restricted to (null when
// unconstrained).
using StepObserver = std::function<void(const Hypothesis& parent, TokenId chosen, const TokenMask* mask)>;

/// Beam search. Constrained decoding restricts every expansion to
/// allowed_tokens() of the hypothesis' chart, so eos is only offered at
/// complete prefixes and every returned string is in the language.
///
/// Candidates are ranked by cumulative log-score; ties break on the
/// lexicographic order of the token sequences. Finished hypotheses leave the
/// beam and compete at the end. Constrained decoding throws
/// kNoViableHypothesis when nothing finishes; unconstrained decoding then
/// returns the unfinished beam instead.
std::vector<DecodeResult> decode(const Scorer& scorer, const std::shared_ptr<const Grammar>& grammar,
                                 const TokenTrie& trie, const DecodeConfig& cfg,
                                 std::string_view conditioning, const StepObserver& observer = {});

/// Add-one smoothed n-gram model over token ids.
///
/// The history of a position is the last order-1 ids of the padded context
/// followed by the target tokens before it. A context encoder turns the
/// conditioning string into context ids at scoring time.
class NgramScorer final : public Scorer {
 public:
  using ContextEncoder = std::function<std::vector<TokenId>(std::string_view)>;

  NgramScorer(std::size_t vocab_size, std::size_t order);

  void add(std::span<const TokenId> target, std::span<const TokenId> context = {});
  void set_context_encoder(ContextEncoder encoder) { encoder_ = std::move(encoder); }

  std::size_t vocab_size() const override { return vocab_size_; }
  std::size_t order() const { return order_; }
  std::vector<double> score(std::string_view conditioning, std::span<const TokenId> prefix) const override;
  double log_prob(std::span<const TokenId> history, TokenId next) const;

 private:
  static constexpr TokenId kPad = -1;

  struct Counts {
    std::size_t total = 0;
    std::map<TokenId, std::size_t> next;
  };

  std::vector<TokenId> history_key(std::span<const TokenId> context, std::span<const TokenId> prefix) const;

  std::size_t vocab_size_;
  std::size_t order_;
  std::map<std::vector<TokenId>, Counts> counts_;
  ContextEncoder encoder_;
};

// Throws kInvalidArgument for an empty corpus or order outside [1, 5].
NgramScorer train_ngram(const std::vector<std::vector<TokenId>>& corpus, std::size_t order,
                        std::size_t vocab_size);

/// Scorer served over HTTP. POSTs {"conditioning": s, "prefix": [ids]} and
/// expects {"scores": [vocab_size numbers]}. Transport failures, timeouts,
/// non-200 statuses and malformed bodies throw kScorer.
class HttpScorer final : public Scorer {
 public:
  HttpScorer(std::string url, std::size_t vocab_size,
             std::chrono::milliseconds timeout = std::chrono::seconds(30));

  std::size_t vocab_size() const override { return vocab_size_; }
  std::vector<double> score(std::string_view conditioning, std::span<const TokenId> prefix) const override;

 private:
  std::string host_;  // scheme://host:port
  std::string path_;
  std::size_t vocab_size_;
  std::chrono::milliseconds timeout_;
};

}  // namespace clamp::decoding
