#pragma once

// Reference implementations the library is checked against. None of them
// use the recognizer, the enumerator or the token trie.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "clamp/earley.hpp"
#include "clamp/grammar.hpp"
#include "clamp/tokens.hpp"

namespace testsupport {

inline constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max() / 4;

// Intersection of the grammar with the automaton reading p (and, unless
// `exact`, then any suffix). D[N][i][j] is the length of the shortest string
// N derives that moves the automaton from state i to state j, solved as a
// shortest-path fixed point over the productions.
//
// Returns the length of the shortest w in L(g) with p a prefix of w (or
// w == p when exact), or nullopt.
inline std::optional<std::size_t> shortest_extension(const clamp::Grammar& g, std::string_view p, bool exact) {
  const std::size_t m = p.size();
  const std::size_t states = m + 1;
  std::map<std::string, std::vector<std::vector<std::size_t>>> D;
  for (const auto& prod : g.productions())
    D.emplace(prod.lhs, std::vector<std::vector<std::size_t>>(states, std::vector<std::size_t>(states, kInf)));

  // (target state, length) pairs for one terminal or class from state i.
  auto step = [&](const clamp::Symbol& s, std::size_t i) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (s.is_char_class()) {
      if (i < m) {
        if (s.chars.contains(static_cast<unsigned char>(p[i]))) out.emplace_back(i + 1, 1);
      } else if (!exact) {
        out.emplace_back(m, 1);
      }
      return out;
    }
    const std::string& t = s.text;
    if (exact) {
      if (i + t.size() <= m && p.substr(i, t.size()) == t) out.emplace_back(i + t.size(), t.size());
      return out;
    }
    const std::size_t k = std::min(t.size(), m - i);
    if (p.substr(i, k) == std::string_view(t).substr(0, k)) out.emplace_back(i + k, t.size());
    return out;
  };

  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& prod : g.productions()) {
      auto& target = D.at(prod.lhs);
      for (std::size_t i = 0; i < states; ++i) {
        std::vector<std::size_t> cur(states, kInf);
        cur[i] = 0;
        for (const auto& sym : prod.rhs) {
          if (sym.is_epsilon()) continue;
          std::vector<std::size_t> next(states, kInf);
          for (std::size_t a = 0; a < states; ++a) {
            if (cur[a] >= kInf) continue;
            if (sym.is_nonterminal()) {
              const auto& row = D.at(sym.text)[a];
              for (std::size_t b = 0; b < states; ++b)
                if (row[b] < kInf) next[b] = std::min(next[b], cur[a] + row[b]);
            } else {
              for (auto [b, len] : step(sym, a)) next[b] = std::min(next[b], cur[a] + len);
            }
          }
          cur = std::move(next);
        }
        for (std::size_t j = 0; j < states; ++j)
          if (cur[j] < target[i][j]) {
            target[i][j] = cur[j];
            changed = true;
          }
      }
    }
  }
  const std::size_t best = D.at(g.start())[0][m];
  if (best >= kInf) return std::nullopt;
  return best;
}

inline bool viable_prefix(const clamp::Grammar& g, std::string_view p) {
  return shortest_extension(g, p, false).has_value();
}

inline bool member(const clamp::Grammar& g, std::string_view w) { return shortest_extension(g, w, true).has_value(); }

// Fixed point for nullability computed directly from the productions.
inline std::set<std::string> nullable_oracle(const clamp::Grammar& g) {
  std::set<std::string> out;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& prod : g.productions()) {
      if (out.count(prod.lhs)) continue;
      bool all = std::all_of(prod.rhs.begin(), prod.rhs.end(), [&](const clamp::Symbol& s) {
        return s.is_epsilon() || (s.is_nonterminal() && out.count(s.text));
      });
      if (all) {
        out.insert(prod.lhs);
        changed = true;
      }
    }
  }
  return out;
}

// Token mask by trying every vocabulary entry from the state.
inline std::vector<clamp::TokenId> trial_mask(const clamp::PrefixState& s, const clamp::Vocabulary& v) {
  std::vector<clamp::TokenId> out;
  for (std::size_t id = 0; id < v.size(); ++id) {
    const auto tid = static_cast<clamp::TokenId>(id);
    if (tid == v.eos()) {
      if (s.is_complete()) out.push_back(tid);
    } else if (s.advance(v.text(tid))) {
      out.push_back(tid);
    }
  }
  return out;
}

// Same mask from the intersection oracle alone.
inline std::vector<clamp::TokenId> oracle_mask(const clamp::Grammar& g, const std::string& prefix,
                                               const clamp::Vocabulary& v) {
  std::vector<clamp::TokenId> out;
  for (std::size_t id = 0; id < v.size(); ++id) {
    const auto tid = static_cast<clamp::TokenId>(id);
    if (tid == v.eos() ? member(g, prefix) : viable_prefix(g, prefix + v.text(tid))) out.push_back(tid);
  }
  return out;
}

// Closed-form Okapi BM25 with the ln(1 + ...) idf, written out term by term.
inline double bm25_closed_form(const std::vector<std::vector<std::string>>& docs, const std::vector<std::string>& query,
                               std::size_t d, double k1, double b) {
  double total = 0;
  for (const auto& doc : docs) total += static_cast<double>(doc.size());
  const double avgdl = total / static_cast<double>(docs.size());
  const double N = static_cast<double>(docs.size());
  double score = 0;
  for (const auto& t : query) {
    double n = 0;
    for (const auto& doc : docs) n += std::count(doc.begin(), doc.end(), t) > 0 ? 1 : 0;
    const double f = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), t));
    if (f == 0) continue;  // the term vanishes; skipping also avoids 0/0 for empty docs at b = 1
    const double idf = std::log(1 + (N - n + 0.5) / (n + 0.5));
    const double dl = static_cast<double>(docs[d].size());
    score += idf * f * (k1 + 1) / (f + k1 * (1 - b + b * dl / avgdl));
  }
  return score;
}

}  // namespace testsupport
