#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clamp/grammar.hpp"
#include "clamp/sexp.hpp"

namespace clamp::induction {

struct Signature {
  std::vector<std::string> args;
  std::string result;
};

// Grammar fragment for the open class of literals of one type. `$` stands for
// the type's own nonterminal, so `$ -> [0-9] | [0-9] $` is a digit string and
// `$_body` names a helper rule private to the class. A snippet without `->`
// is shorthand for the alternatives of `$`.
struct LiteralClass {
  std::string type;
  std::string snippet;
  std::vector<Production> rules;
  Grammar grammar;  // the rules on their own, for literal membership checks
};

class SignatureTable {
 public:
  // Throws kData on a second signature for the same symbol.
  void add_symbol(std::string symbol, Signature sig);
  // Throws kData on a second class for the same type, or a snippet that does
  // not parse.
  void add_literal(std::string type, std::string snippet);

  const Signature* find(std::string_view symbol) const;
  const LiteralClass* literal(std::string_view type) const;

  // Every argument type must be producible: the result of some symbol or a
  // literal class. Throws kData naming the first type that is not.
  void validate() const;

  const std::map<std::string, Signature, std::less<>>& symbols() const { return symbols_; }

 private:
  std::map<std::string, Signature, std::less<>> symbols_;
  std::map<std::string, LiteralClass, std::less<>> literals_;
};

struct TypedExpression {
  sexp::Node node;
  std::string type;
  // Applied or bare symbol; empty for literals.
  std::string symbol;
  bool applied = false;  // written as a list `(symbol args...)`
  std::vector<TypedExpression> children;

  bool is_literal() const { return symbol.empty(); }
};

// Assigns a type to every node. Throws kType for unknown symbols, arity
// mismatches, argument-type mismatches and literals outside their class.
TypedExpression type_check(const sexp::Node& program, const SignatureTable& sigs,
                           const std::optional<std::string>& expected = std::nullopt);

// Nonterminal name used for a type. Injective over type names.
std::string type_nonterminal(std::string_view type);

// One nonterminal per observed type and one production per observed symbol
// application; literal types pull in their class rules. The start symbol is
// the programs' shared root type unless `root_type` overrides it. Output is
// reduced and independent of input order.
Grammar induce_lispress_grammar(std::span<const TypedExpression> programs,
                                const SignatureTable& sigs,
                                const std::optional<std::string>& root_type = std::nullopt);

// ---------------------------------------------------------------------------
// MTOP bracketed trees

struct MtopNode {
  bool is_text = false;
  // Label (`IN:...` / `SL:...`) for brackets, the words for a text span.
  std::string text;
  std::vector<MtopNode> children;

  bool is_intent() const { return !is_text && text.rfind("IN:", 0) == 0; }
  bool is_slot() const { return !is_text && text.rfind("SL:", 0) == 0; }
  bool operator==(const MtopNode&) const = default;
};

// Throws clamp::SyntaxError for unbalanced brackets or malformed labels and
// kData when the root is not an intent.
MtopNode parse_mtop(std::string_view text);
std::string mtop_canonical(const MtopNode& tree);

// Nonterminal per label, a production per observed (label, child pattern),
// and an open TEXT class for spans. Output is reduced and independent of
// input order.
Grammar induce_mtop_grammar(std::span<const MtopNode> trees);

}  // namespace clamp::induction
