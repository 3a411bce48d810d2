#include "clamp/induction.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "clamp/earley.hpp"
#include "clamp/error.hpp"

namespace clamp::induction {

namespace {

std::string mangle(std::string_view prefix, std::string_view name) {
  std::string out(prefix);
  for (unsigned char c : name) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      out += static_cast<char>(c);
    } else if (c == '_') {
      out += "__";
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "_%02X", c);
      out += buf;
    }
  }
  return out;
}

// Replaces `$` outside literals and classes with `name`.
std::string substitute_placeholder(std::string_view snippet, std::string_view name) {
  std::string out;
  char in_delim = 0;
  for (std::size_t i = 0; i < snippet.size(); ++i) {
    char c = snippet[i];
    if (in_delim) {
      out += c;
      if (c == '\\' && i + 1 < snippet.size()) {
        out += snippet[++i];
      } else if (c == in_delim) {
        in_delim = 0;
      }
      continue;
    }
    if (c == '"') in_delim = '"';
    if (c == '[') in_delim = ']';
    if (c == '$')
      out += name;
    else
      out += c;
  }
  return out;
}

std::string production_key(const Production& p) {
  std::string key = p.lhs + " ->";
  for (const auto& s : p.rhs) {
    const std::string body = s.is_char_class() ? s.chars.to_string() : s.text;
    key += ' ';
    key += static_cast<char>('0' + static_cast<int>(s.kind));
    key += std::to_string(body.size()) + ':' + body;
  }
  return key;
}

// Sorted, deduplicated, reduced.
Grammar assemble(std::string start, std::vector<Production> prods) {
  std::map<std::string, Production> ordered;
  for (auto& p : prods) {
    std::string key = production_key(p);
    ordered.emplace(std::move(key), std::move(p));
  }
  std::vector<Production> out;
  out.reserve(ordered.size());
  for (auto& [k, p] : ordered) out.push_back(std::move(p));
  return reduce(Grammar(std::move(start), std::move(out)));
}

}  // namespace

std::string type_nonterminal(std::string_view type) { return mangle("T_", type); }

void SignatureTable::add_symbol(std::string symbol, Signature sig) {
  if (symbol.empty()) throw Error(ErrorCode::kData, "empty symbol name in signature table");
  if (sig.result.empty()) throw Error(ErrorCode::kData, "symbol '" + symbol + "' has no result type");
  auto [it, inserted] = symbols_.emplace(std::move(symbol), std::move(sig));
  if (!inserted) throw Error(ErrorCode::kData, "duplicate signature for symbol '" + it->first + "'");
}

void SignatureTable::add_literal(std::string type, std::string snippet) {
  if (literals_.count(type)) throw Error(ErrorCode::kData, "duplicate literal class for type '" + type + "'");
  const std::string nt = type_nonterminal(type);
  std::string body = snippet.find("->") == std::string::npos ? "$ -> " + snippet : snippet;
  std::string text = "@start " + nt + "\n" + substitute_placeholder(body, nt);
  Grammar g = [&] {
    try {
      return reduce(parse_grammar(text));
    } catch (const Error& e) {
      throw Error(ErrorCode::kData, "literal class for '" + type + "': " + e.what());
    }
  }();
  std::vector<Production> rules(g.productions().begin(), g.productions().end());
  LiteralClass lc{type, std::move(snippet), std::move(rules), std::move(g)};
  literals_.emplace(std::move(type), std::move(lc));
}

const Signature* SignatureTable::find(std::string_view symbol) const {
  auto it = symbols_.find(symbol);
  return it == symbols_.end() ? nullptr : &it->second;
}

const LiteralClass* SignatureTable::literal(std::string_view type) const {
  auto it = literals_.find(type);
  return it == literals_.end() ? nullptr : &it->second;
}

void SignatureTable::validate() const {
  std::set<std::string, std::less<>> producible;
  for (const auto& [sym, sig] : symbols_) producible.insert(sig.result);
  for (const auto& [type, lc] : literals_) producible.insert(type);
  for (const auto& [sym, sig] : symbols_)
    for (const auto& a : sig.args)
      if (!producible.count(a))
        throw Error(ErrorCode::kData,
                    "type '" + a + "' (argument of '" + sym + "') is neither a result type nor a literal class");
}

namespace {

[[noreturn]] void type_error(const std::string& msg) { throw Error(ErrorCode::kType, msg); }

TypedExpression check(const sexp::Node& n, const SignatureTable& sigs,
                      const std::optional<std::string>& expected) {
  using Kind = sexp::Node::Kind;
  TypedExpression out;
  out.node = n;

  auto try_literal = [&](const std::string& type) -> bool {
    const LiteralClass* lc = sigs.literal(type);
    if (!lc || !recognize(lc->grammar, sexp::canonical(n))) return false;
    out.type = type;
    return true;
  };

  if (n.kind == Kind::kList) {
    if (n.children.empty()) type_error("empty application ()");
    const sexp::Node& head = n.children.front();
    if (head.kind != Kind::kAtom) type_error("application head must be a symbol: " + sexp::canonical(n));
    const Signature* sig = sigs.find(head.text);
    if (!sig) type_error("unknown symbol '" + head.text + "'");
    const std::size_t arity = n.children.size() - 1;
    if (arity != sig->args.size())
      type_error("arity mismatch for '" + head.text + "': expected " + std::to_string(sig->args.size()) +
                 " argument(s), got " + std::to_string(arity));
    if (expected && sig->result != *expected)
      type_error("argument-type mismatch: '" + head.text + "' returns " + sig->result + ", expected " +
                 *expected);
    out.type = sig->result;
    out.symbol = head.text;
    out.applied = true;
    for (std::size_t i = 0; i < arity; ++i)
      out.children.push_back(check(n.children[i + 1], sigs, sig->args[i]));
    return out;
  }

  if (n.kind == Kind::kAtom) {
    if (const Signature* sig = sigs.find(n.text)) {
      if (!expected || sig->result == *expected) {
        if (!sig->args.empty())
          type_error("arity mismatch for '" + n.text + "': expected " + std::to_string(sig->args.size()) +
                     " argument(s), got 0");
        out.type = sig->result;
        out.symbol = n.text;
        return out;
      }
    }
  }

  if (!expected) {
    if (n.kind == Kind::kAtom && !sigs.find(n.text)) type_error("unknown symbol '" + n.text + "'");
    type_error("cannot type literal " + sexp::canonical(n) + " without an expected type");
  }
  if (try_literal(*expected)) return out;
  if (n.kind == Kind::kAtom && !sigs.literal(*expected)) {
    if (const Signature* sig = sigs.find(n.text))
      type_error("argument-type mismatch: '" + n.text + "' returns " + sig->result + ", expected " + *expected);
    type_error("unknown symbol '" + n.text + "'");
  }
  type_error("ill-typed literal " + sexp::canonical(n) + " for type " + *expected);
}

void collect(const TypedExpression& e, const SignatureTable& sigs, std::vector<Production>& prods,
             std::set<std::string>& literal_types) {
  const std::string lhs = type_nonterminal(e.type);
  if (e.is_literal()) {
    literal_types.insert(e.type);
    return;
  }
  if (!e.applied) {
    prods.push_back({lhs, {Symbol::terminal(e.symbol)}});
    return;
  }
  std::vector<Symbol> rhs{Symbol::terminal("("), Symbol::terminal(e.symbol)};
  for (const auto& c : e.children) {
    rhs.push_back(Symbol::terminal(" "));
    rhs.push_back(Symbol::nonterminal(type_nonterminal(c.type)));
  }
  rhs.push_back(Symbol::terminal(")"));
  prods.push_back({lhs, std::move(rhs)});
  for (const auto& c : e.children) collect(c, sigs, prods, literal_types);
}

}  // namespace

TypedExpression type_check(const sexp::Node& program, const SignatureTable& sigs,
                           const std::optional<std::string>& expected) {
  return check(program, sigs, expected);
}

Grammar induce_lispress_grammar(std::span<const TypedExpression> programs, const SignatureTable& sigs,
                                const std::optional<std::string>& root_type) {
  if (programs.empty()) throw Error(ErrorCode::kInvalidArgument, "no programs to induce a grammar from");
  std::string root = root_type ? *root_type : programs.front().type;
  if (!root_type)
    for (const auto& p : programs)
      if (p.type != root)
        throw Error(ErrorCode::kType, "programs disagree on the root type (" + root + " vs " + p.type +
                                          "); designate a root type");

  std::vector<Production> prods;
  std::set<std::string> literal_types;
  for (const auto& p : programs) collect(p, sigs, prods, literal_types);
  for (const auto& t : literal_types) {
    const LiteralClass* lc = sigs.literal(t);
    prods.insert(prods.end(), lc->rules.begin(), lc->rules.end());
  }
  const std::string start = type_nonterminal(root);
  bool has_start = std::any_of(prods.begin(), prods.end(), [&](const Production& p) { return p.lhs == start; });
  if (!has_start) throw Error(ErrorCode::kType, "no observed program has the root type " + root);
  return assemble(start, std::move(prods));
}

// ---------------------------------------------------------------------------
// MTOP

namespace {

bool mtop_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

class MtopParser {
 public:
  explicit MtopParser(std::string_view text) : text_(text) {}

  MtopNode parse_all() {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != '[') fail("expected '['");
    MtopNode root = bracket();
    skip();
    if (pos_ < text_.size()) fail("trailing input after the root bracket");
    if (!root.is_intent()) throw Error(ErrorCode::kData, "root label '" + root.text + "' is not an intent");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(1, pos_ + 1, msg); }

  void skip() {
    while (pos_ < text_.size() && mtop_space(text_[pos_])) ++pos_;
  }

  std::string word() {
    std::size_t b = pos_;
    while (pos_ < text_.size() && !mtop_space(text_[pos_]) && text_[pos_] != '[' && text_[pos_] != ']') ++pos_;
    return std::string(text_.substr(b, pos_ - b));
  }

  MtopNode bracket() {
    const std::size_t open = pos_++;
    MtopNode n;
    n.text = word();
    if (n.text.size() <= 3 || !(n.is_intent() || n.is_slot())) {
      pos_ = open + 1;
      fail("label must start with IN: or SL: and name something");
    }
    std::string span;
    auto flush = [&] {
      if (!span.empty()) n.children.push_back({true, std::move(span), {}});
      span.clear();
    };
    while (true) {
      skip();
      if (pos_ >= text_.size()) {
        pos_ = open;
        fail("unbalanced '['");
      }
      char c = text_[pos_];
      if (c == ']') {
        ++pos_;
        flush();
        return n;
      }
      if (c == '[') {
        flush();
        n.children.push_back(bracket());
        continue;
      }
      if (!span.empty()) span += ' ';
      span += word();
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void write_mtop(const MtopNode& n, std::string& out) {
  if (n.is_text) {
    out += n.text;
    return;
  }
  out += '[';
  out += n.text;
  for (const auto& c : n.children) {
    out += ' ';
    write_mtop(c, out);
  }
  out += ']';
}

std::string label_nonterminal(const std::string& label) {
  if (label.rfind("IN:", 0) == 0) return mangle("INTENT_", label.substr(3));
  return mangle("SLOT_", label.substr(3));
}

void collect_mtop(const MtopNode& n, std::vector<Production>& prods) {
  std::vector<Symbol> rhs{Symbol::terminal("[" + n.text)};
  for (const auto& c : n.children) {
    rhs.push_back(Symbol::terminal(" "));
    rhs.push_back(Symbol::nonterminal(c.is_text ? "TEXT" : label_nonterminal(c.text)));
    if (!c.is_text) collect_mtop(c, prods);
  }
  rhs.push_back(Symbol::terminal("]"));
  prods.push_back({label_nonterminal(n.text), std::move(rhs)});
}

}  // namespace

MtopNode parse_mtop(std::string_view text) { return MtopParser(text).parse_all(); }

std::string mtop_canonical(const MtopNode& tree) {
  std::string out;
  write_mtop(tree, out);
  return out;
}

Grammar induce_mtop_grammar(std::span<const MtopNode> trees) {
  if (trees.empty()) throw Error(ErrorCode::kInvalidArgument, "no trees to induce a grammar from");
  std::vector<Production> prods;
  for (const auto& t : trees) {
    if (!t.is_intent()) throw Error(ErrorCode::kData, "root label '" + t.text + "' is not an intent");
    prods.push_back({"START", {Symbol::nonterminal(label_nonterminal(t.text))}});
    collect_mtop(t, prods);
  }
  CharSet word_char = CharSet::single('[');
  for (unsigned char c : std::string_view("] \t\n\r")) word_char.insert(c);
  word_char = word_char.complement();
  prods.push_back({"TEXT", {Symbol::nonterminal("WORD")}});
  prods.push_back({"TEXT", {Symbol::nonterminal("WORD"), Symbol::terminal(" "), Symbol::nonterminal("TEXT")}});
  prods.push_back({"WORD", {Symbol::char_class(word_char)}});
  prods.push_back({"WORD", {Symbol::char_class(word_char), Symbol::nonterminal("WORD")}});
  return assemble("START", std::move(prods));
}

}  // namespace clamp::induction
