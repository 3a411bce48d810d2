#include "clamp/tokens.hpp"

#include <algorithm>

#include "clamp/error.hpp"

namespace clamp {

Vocabulary::Vocabulary(std::vector<std::string> entries, TokenId eos)
    : entries_(std::move(entries)), eos_(eos) {
  if (eos_ < 0 || static_cast<std::size_t>(eos_) >= entries_.size())
    throw Error(ErrorCode::kInvalidArgument, "eos id " + std::to_string(eos_) + " out of range");
  if (!entries_[static_cast<std::size_t>(eos_)].empty())
    throw Error(ErrorCode::kInvalidArgument, "eos entry must be the empty string");
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (static_cast<TokenId>(i) != eos_ && entries_[i].empty())
      throw Error(ErrorCode::kInvalidArgument, "token " + std::to_string(i) + " has an empty string");
}

TokenTrie::TokenTrie(Vocabulary vocab) : vocab_(std::move(vocab)) {
  nodes_.emplace_back();
  for (std::size_t id = 0; id < vocab_.size(); ++id) {
    if (static_cast<TokenId>(id) == vocab_.eos()) continue;
    std::uint32_t cur = 0;
    for (unsigned char c : vocab_.entries()[id]) {
      auto& kids = nodes_[cur].children;
      auto it = std::lower_bound(kids.begin(), kids.end(), c,
                                 [](const auto& e, unsigned char v) { return e.first < v; });
      if (it != kids.end() && it->first == c) {
        cur = it->second;
      } else {
        auto next = static_cast<std::uint32_t>(nodes_.size());
        kids.insert(it, {c, next});
        nodes_.emplace_back();
        cur = next;
      }
    }
    nodes_[cur].tokens.push_back(static_cast<TokenId>(id));
  }
}

const TokenTrie::Node* TokenTrie::find(std::string_view text) const {
  const Node* cur = &nodes_.front();
  for (unsigned char c : text) {
    auto it = std::lower_bound(cur->children.begin(), cur->children.end(), c,
                               [](const auto& e, unsigned char v) { return e.first < v; });
    if (it == cur->children.end() || it->first != c) return nullptr;
    cur = &nodes_[it->second];
  }
  return cur;
}

bool TokenMask::contains(TokenId id) const { return std::binary_search(ids.begin(), ids.end(), id); }

std::vector<std::uint8_t> TokenMask::dense(std::size_t vocab_size) const {
  std::vector<std::uint8_t> out(vocab_size, 0);
  for (TokenId id : ids)
    if (id >= 0 && static_cast<std::size_t>(id) < vocab_size) out[static_cast<std::size_t>(id)] = 1;
  return out;
}

namespace {

void walk(const PrefixState& state, const TokenTrie& trie, const TokenTrie::Node& node,
          std::vector<TokenId>& out) {
  const CharSet& next = state.allowed_next_chars();
  for (const auto& [c, child_index] : node.children) {
    if (!next.contains(c)) continue;
    auto advanced = state.advance(c);
    const auto& child = trie.node(child_index);
    out.insert(out.end(), child.tokens.begin(), child.tokens.end());
    if (!child.children.empty()) walk(*advanced, trie, child, out);
  }
}

}  // namespace

TokenMask allowed_tokens(const PrefixState& state, const TokenTrie& trie) {
  TokenMask mask;
  walk(state, trie, trie.root(), mask.ids);
  if (state.is_complete()) mask.ids.push_back(trie.vocabulary().eos());
  std::sort(mask.ids.begin(), mask.ids.end());
  return mask;
}

PrefixState advance_token(const PrefixState& state, const TokenTrie& trie, TokenId id) {
  const Vocabulary& v = trie.vocabulary();
  if (id < 0 || static_cast<std::size_t>(id) >= v.size())
    throw Error(ErrorCode::kDisallowedToken, "token id " + std::to_string(id) + " out of range");
  if (id == v.eos())
    throw Error(ErrorCode::kDisallowedToken, "eos cannot be advanced over");
  auto next = state.advance(v.text(id));
  if (!next)
    throw Error(ErrorCode::kDisallowedToken,
                "token " + std::to_string(id) + " is not a legal continuation");
  return std::move(*next);
}

std::vector<TokenId> tokenize_greedy(const TokenTrie& trie, std::string_view text) {
  std::vector<TokenId> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const TokenTrie::Node* cur = &trie.root();
    TokenId best = -1;
    std::size_t best_len = 0;
    for (std::size_t k = pos; k < text.size(); ++k) {
      auto c = static_cast<unsigned char>(text[k]);
      auto it = std::lower_bound(cur->children.begin(), cur->children.end(), c,
                                 [](const auto& e, unsigned char v) { return e.first < v; });
      if (it == cur->children.end() || it->first != c) break;
      cur = &trie.node(it->second);
      if (!cur->tokens.empty()) {
        best = cur->tokens.front();
        best_len = k - pos + 1;
      }
    }
    if (best < 0)
      throw Error(ErrorCode::kData, "no token covers byte offset " + std::to_string(pos));
    out.push_back(best);
    pos += best_len;
  }
  return out;
}

std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> ids) {
  std::string out;
  for (TokenId id : ids) out += vocab.text(id);
  return out;
}

}  // namespace clamp
