#pragma once

#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace clamp {

// A set of byte values. Recognition is byte-level: UTF-8 text is scanned one
// byte at a time, so multi-byte characters are ordinary byte sequences.
class CharSet {
 public:
  CharSet() = default;

  static CharSet single(unsigned char c) {
    CharSet s;
    s.insert(c);
    return s;
  }
  static CharSet range(unsigned char lo, unsigned char hi) {
    CharSet s;
    for (unsigned c = lo; c <= hi; ++c) s.insert(static_cast<unsigned char>(c));
    return s;
  }

  void insert(unsigned char c) { bits_.set(c); }
  void erase(unsigned char c) { bits_.reset(c); }
  bool contains(unsigned char c) const { return bits_.test(c); }
  std::size_t size() const { return bits_.count(); }
  bool empty() const { return bits_.none(); }

  CharSet complement() const {
    CharSet s;
    s.bits_ = ~bits_;
    return s;
  }
  CharSet& operator|=(const CharSet& o) {
    bits_ |= o.bits_;
    return *this;
  }
  bool operator==(const CharSet& o) const { return bits_ == o.bits_; }

  template <typename F>
  void for_each(F&& f) const {
    for (unsigned c = 0; c < 256; ++c)
      if (bits_.test(c)) f(static_cast<unsigned char>(c));
  }

  std::string to_string() const;

 private:
  std::bitset<256> bits_;
};

struct Symbol {
  enum class Kind : std::uint8_t { kTerminal, kNonterminal, kCharClass };

  Kind kind = Kind::kTerminal;
  // Literal text for terminals, the name for nonterminals.
  std::string text;
  CharSet chars;

  static Symbol terminal(std::string s) { return {Kind::kTerminal, std::move(s), {}}; }
  static Symbol nonterminal(std::string name) {
    return {Kind::kNonterminal, std::move(name), {}};
  }
  static Symbol char_class(CharSet cs) { return {Kind::kCharClass, {}, cs}; }

  bool is_terminal() const { return kind == Kind::kTerminal; }
  bool is_nonterminal() const { return kind == Kind::kNonterminal; }
  bool is_char_class() const { return kind == Kind::kCharClass; }
  bool is_epsilon() const { return is_terminal() && text.empty(); }

  bool operator==(const Symbol& o) const {
    if (kind != o.kind) return false;
    return is_char_class() ? chars == o.chars : text == o.text;
  }
};

struct Production {
  std::string lhs;
  std::vector<Symbol> rhs;

  bool is_epsilon() const { return rhs.size() == 1 && rhs[0].is_epsilon(); }
  bool operator==(const Production& o) const = default;
};

/// Immutable context-free grammar.
///
/// Construction validates the productions, drops exact duplicates (first
/// occurrence wins) and interns nonterminal names. The interned tables are
/// what the recognizer walks; the symbolic productions are kept for
/// serialization and structural comparison.
class Grammar {
 public:
  Grammar(std::string start, std::vector<Production> productions,
          std::string version_tag = {});

  const std::string& start() const { return start_; }
  std::span<const Production> productions() const { return productions_; }
  const std::string& version_tag() const { return version_tag_; }

  std::size_t nonterminal_count() const { return names_.size(); }
  const std::string& nonterminal_name(std::size_t id) const { return names_[id]; }
  std::optional<std::size_t> find_nonterminal(std::string_view name) const;
  std::size_t start_id() const { return start_id_; }

  std::size_t lhs_id(std::size_t prod) const { return lhs_ids_[prod]; }
  std::span<const std::size_t> productions_of(std::size_t nt) const { return by_lhs_[nt]; }
  // Right-hand side length as seen by recognition: 0 for an epsilon rule.
  std::size_t rhs_length(std::size_t prod) const {
    return productions_[prod].is_epsilon() ? 0 : productions_[prod].rhs.size();
  }
  // Interned id of the nonterminal at rhs position `pos`, or -1 for a
  // terminal or character class.
  std::int32_t rhs_nonterminal(std::size_t prod, std::size_t pos) const {
    return rhs_ids_[prod][pos];
  }
  bool nullable(std::size_t nt) const { return nullable_[nt]; }
  // True when every nonterminal is reachable from start and productive.
  bool is_reduced() const { return reduced_; }

  bool operator==(const Grammar& o) const {
    return start_ == o.start_ && productions_ == o.productions_ &&
           version_tag_ == o.version_tag_;
  }

 private:
  std::string start_;
  std::vector<Production> productions_;
  std::string version_tag_;

  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> ids_;
  std::size_t start_id_ = 0;
  std::vector<std::size_t> lhs_ids_;
  std::vector<std::vector<std::size_t>> by_lhs_;
  std::vector<std::vector<std::int32_t>> rhs_ids_;
  std::vector<bool> nullable_;
  bool reduced_ = false;
};

bool is_identifier(std::string_view s);

// Grammar text format, one rule per line:
//   # comment
//   @start Name
//   @version free text
//   Name -> "literal" [a-z] [^"] Other | "" ...
Grammar parse_grammar(std::string_view text);
std::string serialize_grammar(const Grammar& g);

// Drops unreachable and unproductive nonterminals. Throws kEmptyLanguage when
// the start symbol derives no terminal string.
Grammar reduce(const Grammar& g);

std::set<std::string> nullable_set(const Grammar& g);

// Every byte that can appear in some terminal or character class.
CharSet terminal_alphabet(const Grammar& g);

inline constexpr std::size_t kEnumerationLimit = 1'000'000;

// All members of L(g) no longer than max_len bytes, by bounded fixed point
// over per-nonterminal string sets. Throws kExplosion past kEnumerationLimit
// strings for any one nonterminal.
std::set<std::string> enumerate_language(const Grammar& g, std::size_t max_len);

}  // namespace clamp
