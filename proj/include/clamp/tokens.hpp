#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "clamp/earley.hpp"

namespace clamp {

using TokenId = std::int32_t;

/// Token id -> byte string. Ids are dense; the eos entry is the empty string
/// and every other entry is nonempty.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> entries, TokenId eos);

  std::size_t size() const { return entries_.size(); }
  TokenId eos() const { return eos_; }
  const std::string& text(TokenId id) const { return entries_.at(static_cast<std::size_t>(id)); }
  std::span<const std::string> entries() const { return entries_; }

 private:
  std::vector<std::string> entries_;
  TokenId eos_;
};

class TokenTrie {
 public:
  struct Node {
    std::vector<std::pair<unsigned char, std::uint32_t>> children;  // sorted by byte
    std::vector<TokenId> tokens;
  };

  explicit TokenTrie(Vocabulary vocab);

  const Vocabulary& vocabulary() const { return vocab_; }
  const Node& root() const { return nodes_.front(); }
  const Node& node(std::uint32_t i) const { return nodes_[i]; }
  std::size_t node_count() const { return nodes_.size(); }
  // Node reached by walking `text` from the root, or nullptr.
  const Node* find(std::string_view text) const;

 private:
  Vocabulary vocab_;
  std::vector<Node> nodes_;
};

struct TokenMask {
  std::vector<TokenId> ids;  // ascending

  bool contains(TokenId id) const;
  // One byte per vocabulary entry, 1 where the token is legal.
  std::vector<std::uint8_t> dense(std::size_t vocab_size) const;
};

// Tokens whose every byte advances successively from `state`, plus eos when
// the consumed prefix is complete. The trie is walked in step with the chart
// so a disallowed byte prunes the whole subtree below it.
TokenMask allowed_tokens(const PrefixState& state, const TokenTrie& trie);

// Throws kDisallowedToken for eos or a token that leaves the viable set.
PrefixState advance_token(const PrefixState& state, const TokenTrie& trie, TokenId id);

// Greedy longest-match segmentation; throws kData when some byte has no
// covering token.
std::vector<TokenId> tokenize_greedy(const TokenTrie& trie, std::string_view text);

std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> ids);

}  // namespace clamp
