#include <doctest.h>

#include "clamp/error.hpp"
#include "clamp/tokens.hpp"
#include "support/oracles.hpp"
#include "support/random_grammar.hpp"

using namespace clamp;

namespace {

Grammar anbn() { return parse_grammar("@start S\nS -> \"a\" S \"b\"\nS -> \"\"\n"); }

// a=0 b=1 ab=2 aa=3 eos=4
TokenTrie small_trie() { return TokenTrie(Vocabulary({"a", "b", "ab", "aa", ""}, 4)); }

}  // namespace

TEST_CASE("vocabulary validation") {
  CHECK_THROWS_AS(Vocabulary({"a", ""}, 2), Error);
  CHECK_THROWS_AS(Vocabulary({"a", "x"}, 1), Error);
  CHECK_THROWS_AS(Vocabulary({"", "", "b"}, 0), Error);
  CHECK_NOTHROW(Vocabulary({"", "b"}, 0));
}

TEST_CASE("trie over a small vocabulary") {
  TokenTrie t(Vocabulary({"a", "ab", "b", ""}, 3));
  std::size_t marked = 0;
  for (std::size_t i = 0; i < t.node_count(); ++i) marked += t.node(static_cast<std::uint32_t>(i)).tokens.size();
  CHECK(marked == 3);
  REQUIRE(t.find("ab"));
  CHECK(t.find("ab")->tokens == std::vector<TokenId>{1});
  CHECK(t.find("ba") == nullptr);
}

TEST_CASE("every token of a random 1000-entry vocabulary is found") {
  SplitMix64 rng(5);
  std::vector<std::string> entries{""};
  for (int i = 1; i < 1000; ++i) {
    std::string s;
    const auto len = 1 + rng.below(6);
    for (std::uint64_t k = 0; k < len; ++k) s += static_cast<char>('a' + rng.below(26));
    entries.push_back(s);
  }
  TokenTrie t(Vocabulary(entries, 0));
  for (std::size_t id = 1; id < entries.size(); ++id) {
    const auto* node = t.find(entries[id]);
    REQUIRE(node);
    REQUIRE(std::find(node->tokens.begin(), node->tokens.end(), static_cast<TokenId>(id)) != node->tokens.end());
  }
}

TEST_CASE("masks over a^n b^n") {
  auto trie = small_trie();
  auto init = PrefixState::initial(anbn());
  CHECK(allowed_tokens(init, trie).ids == std::vector<TokenId>{0, 2, 3, 4});
  auto aab = init.advance("aab");
  REQUIRE(aab);
  CHECK(allowed_tokens(*aab, trie).ids == std::vector<TokenId>{1});
  auto mask = allowed_tokens(init, trie);
  CHECK(mask.contains(4));
  CHECK_FALSE(mask.contains(1));
  CHECK(mask.dense(5) == std::vector<std::uint8_t>{1, 0, 1, 1, 1});
}

TEST_CASE("vocabulary outside the allowed characters") {
  TokenTrie t(Vocabulary({"x", "yz", ""}, 2));
  auto init = PrefixState::initial(anbn());
  CHECK(allowed_tokens(init, t).ids == std::vector<TokenId>{2});
  auto a = *init.advance("a");
  CHECK(allowed_tokens(a, t).ids.empty());
}

TEST_CASE("advance_token") {
  auto trie = small_trie();
  auto init = PrefixState::initial(anbn());
  auto via_token = advance_token(init, trie, 2);
  auto via_chars = *init.advance('a')->advance('b');
  CHECK(via_token.is_complete() == via_chars.is_complete());
  CHECK(std::vector<EarleyItem>(via_token.frontier_items().begin(), via_token.frontier_items().end()) ==
        std::vector<EarleyItem>(via_chars.frontier_items().begin(), via_chars.frontier_items().end()));

  auto s = advance_token(advance_token(advance_token(init, trie, 3), trie, 1), trie, 1);
  CHECK(s.is_complete());

  auto code = [&](TokenId id) {
    try {
      advance_token(init, trie, id);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  CHECK(code(1) == ErrorCode::kDisallowedToken);
  CHECK(code(4) == ErrorCode::kDisallowedToken);
  CHECK(code(99) == ErrorCode::kDisallowedToken);
}

TEST_CASE("masks equal trial advance and the intersection oracle") {
  SplitMix64 rng(77);
  for (int i = 0; i < 60; ++i) {
    Grammar g = testsupport::random_reduced_grammar(rng);
    const std::string sigma = testsupport::letters_of(g);
    TokenTrie trie(testsupport::random_vocabulary(rng, sigma));
    auto init = PrefixState::initial(g);
    for (const auto& p : testsupport::all_strings(sigma, 4)) {
      auto s = init.advance(p);
      if (!s) continue;
      auto mask = allowed_tokens(*s, trie).ids;
      REQUIRE(mask == testsupport::trial_mask(*s, trie.vocabulary()));
      if (p.size() <= 2) REQUIRE(mask == testsupport::oracle_mask(g, p, trie.vocabulary()));
    }
  }
}

TEST_CASE("random token walks inside the mask stay viable") {
  SplitMix64 rng(88);
  for (int i = 0; i < 200; ++i) {
    Grammar g = testsupport::random_reduced_grammar(rng);
    TokenTrie trie(testsupport::random_vocabulary(rng, testsupport::letters_of(g)));
    auto s = PrefixState::initial(g);
    std::string spelled;
    for (int step = 0; step < 8; ++step) {
      auto mask = allowed_tokens(s, trie).ids;
      mask.erase(std::remove(mask.begin(), mask.end(), trie.vocabulary().eos()), mask.end());
      if (mask.empty()) break;
      TokenId id = mask[rng.below(mask.size())];
      s = advance_token(s, trie, id);
      spelled += trie.vocabulary().text(id);
      REQUIRE(testsupport::viable_prefix(g, spelled));
    }
  }
}

TEST_CASE("greedy tokenization") {
  auto trie = small_trie();
  CHECK(tokenize_greedy(trie, "aab") == std::vector<TokenId>{3, 1});
  CHECK(tokenize_greedy(trie, "abab") == std::vector<TokenId>{2, 2});
  CHECK(detokenize(trie.vocabulary(), std::vector<TokenId>{3, 1, 4}) == "aab");
  CHECK_THROWS_AS(tokenize_greedy(trie, "ac"), Error);
}
