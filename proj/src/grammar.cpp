#include "clamp/grammar.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>

#include "clamp/error.hpp"

namespace clamp {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kSyntax: return "syntax";
    case ErrorCode::kUndefinedNonterminal: return "undefined_nonterminal";
    case ErrorCode::kDuplicateStart: return "duplicate_start";
    case ErrorCode::kEmptyLanguage: return "empty_language";
    case ErrorCode::kExplosion: return "explosion";
    case ErrorCode::kRejected: return "rejected";
    case ErrorCode::kDisallowedToken: return "disallowed_token";
    case ErrorCode::kType: return "type";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kData: return "data";
    case ErrorCode::kNoViableHypothesis: return "no_viable_hypothesis";
    case ErrorCode::kScorer: return "scorer";
    case ErrorCode::kNotSupported: return "not_supported";
  }
  return "unknown";
}

namespace {

bool printable(unsigned char c) { return c >= 0x20 && c < 0x7f; }

void append_hex(std::string& out, unsigned char c) {
  char buf[5];
  std::snprintf(buf, sizeof buf, "\\x%02x", c);
  out += buf;
}

std::string quote_literal(std::string_view s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20 || c == 0x7f)
          append_hex(out, c);
        else
          out += static_cast<char>(c);
    }
  }
  out += '"';
  return out;
}

void append_class_char(std::string& out, unsigned char c) {
  switch (c) {
    case ']': case '[': case '\\': case '^': case '-': case '"':
      out += '\\';
      out += static_cast<char>(c);
      break;
    case '\n': out += "\\n"; break;
    case '\t': out += "\\t"; break;
    case '\r': out += "\\r"; break;
    default:
      if (printable(c))
        out += static_cast<char>(c);
      else
        append_hex(out, c);
  }
}

std::string class_body(const CharSet& cs) {
  std::string out;
  unsigned c = 0;
  while (c < 256) {
    if (!cs.contains(static_cast<unsigned char>(c))) {
      ++c;
      continue;
    }
    unsigned end = c;
    while (end + 1 < 256 && cs.contains(static_cast<unsigned char>(end + 1))) ++end;
    if (end - c >= 2) {
      append_class_char(out, static_cast<unsigned char>(c));
      out += '-';
      append_class_char(out, static_cast<unsigned char>(end));
    } else {
      for (unsigned k = c; k <= end; ++k) append_class_char(out, static_cast<unsigned char>(k));
    }
    c = end + 1;
  }
  return out;
}

std::string symbol_text(const Symbol& s) {
  switch (s.kind) {
    case Symbol::Kind::kTerminal: return quote_literal(s.text);
    case Symbol::Kind::kNonterminal: return s.text;
    case Symbol::Kind::kCharClass: return s.chars.to_string();
  }
  return {};
}

}  // namespace

std::string CharSet::to_string() const {
  if (size() > 128) return "[^" + class_body(complement()) + "]";
  return "[" + class_body(*this) + "]";
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  if (!head(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(),
                     [&](char c) { return head(c) || (c >= '0' && c <= '9'); });
}

Grammar::Grammar(std::string start, std::vector<Production> productions,
                 std::string version_tag)
    : start_(std::move(start)), version_tag_(std::move(version_tag)) {
  if (version_tag_.find('\n') != std::string::npos)
    throw Error(ErrorCode::kInvalidArgument, "version tag must be a single line");

  for (auto& p : productions) {
    if (!is_identifier(p.lhs))
      throw Error(ErrorCode::kInvalidArgument, "invalid nonterminal name '" + p.lhs + "'");
    if (p.rhs.empty())
      throw Error(ErrorCode::kInvalidArgument,
                  "production for " + p.lhs + " has an empty right-hand side; write \"\"");
    for (const auto& s : p.rhs) {
      if (s.is_epsilon() && p.rhs.size() != 1)
        throw Error(ErrorCode::kInvalidArgument,
                    "\"\" must be the entire right-hand side (in a rule for " + p.lhs + ")");
      if (s.is_char_class() && s.chars.empty())
        throw Error(ErrorCode::kInvalidArgument, "empty character class in a rule for " + p.lhs);
      if (s.is_nonterminal() && !is_identifier(s.text))
        throw Error(ErrorCode::kInvalidArgument, "invalid nonterminal name '" + s.text + "'");
    }
    if (std::find(productions_.begin(), productions_.end(), p) != productions_.end()) continue;
    if (ids_.emplace(p.lhs, names_.size()).second) names_.push_back(p.lhs);
    productions_.push_back(std::move(p));
  }

  auto start_it = ids_.find(start_);
  if (start_it == ids_.end())
    throw Error(ErrorCode::kUndefinedNonterminal,
                "start symbol '" + start_ + "' has no productions");
  start_id_ = start_it->second;

  by_lhs_.resize(names_.size());
  lhs_ids_.reserve(productions_.size());
  rhs_ids_.reserve(productions_.size());
  for (std::size_t i = 0; i < productions_.size(); ++i) {
    const auto& p = productions_[i];
    std::size_t lhs = ids_.at(p.lhs);
    lhs_ids_.push_back(lhs);
    by_lhs_[lhs].push_back(i);
    std::vector<std::int32_t> row;
    if (!p.is_epsilon()) {
      for (const auto& s : p.rhs) {
        if (!s.is_nonterminal()) {
          row.push_back(-1);
          continue;
        }
        auto it = ids_.find(s.text);
        if (it == ids_.end())
          throw Error(ErrorCode::kUndefinedNonterminal, "undefined nonterminal '" + s.text + "'");
        row.push_back(static_cast<std::int32_t>(it->second));
      }
    }
    rhs_ids_.push_back(std::move(row));
  }

  // Nullable and productive sets share the same fixed-point shape.
  auto fixpoint = [&](auto symbol_ok) {
    std::vector<bool> mark(names_.size(), false);
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < productions_.size(); ++i) {
        if (mark[lhs_ids_[i]]) continue;
        bool ok = true;
        for (std::size_t k = 0; k < rhs_ids_[i].size() && ok; ++k) {
          std::int32_t nt = rhs_ids_[i][k];
          ok = nt >= 0 ? mark[static_cast<std::size_t>(nt)] : symbol_ok(productions_[i].rhs[k]);
        }
        if (ok) {
          mark[lhs_ids_[i]] = true;
          changed = true;
        }
      }
    }
    return mark;
  };
  nullable_ = fixpoint([](const Symbol&) { return false; });
  std::vector<bool> productive = fixpoint([](const Symbol&) { return true; });

  std::vector<bool> reachable(names_.size(), false);
  std::vector<std::size_t> stack{start_id_};
  reachable[start_id_] = true;
  while (!stack.empty()) {
    std::size_t nt = stack.back();
    stack.pop_back();
    for (std::size_t p : by_lhs_[nt])
      for (std::int32_t child : rhs_ids_[p])
        if (child >= 0 && !reachable[static_cast<std::size_t>(child)]) {
          reachable[static_cast<std::size_t>(child)] = true;
          stack.push_back(static_cast<std::size_t>(child));
        }
  }
  reduced_ = true;
  for (std::size_t nt = 0; nt < names_.size(); ++nt)
    if (!reachable[nt] || !productive[nt]) reduced_ = false;
  // A productive nonterminal can still own a rule through an unproductive one.
  for (std::size_t i = 0; i < productions_.size() && reduced_; ++i)
    for (std::int32_t child : rhs_ids_[i])
      if (child >= 0 && !productive[static_cast<std::size_t>(child)]) reduced_ = false;
}

std::optional<std::size_t> Grammar::find_nonterminal(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

class LineScanner {
 public:
  LineScanner(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

  void skip_space() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t' || line_[pos_] == '\r'))
      ++pos_;
  }
  bool at_end() {
    skip_space();
    return pos_ >= line_.size() || line_[pos_] == '#';
  }
  char peek() const { return line_[pos_]; }
  std::size_t column() const { return pos_ + 1; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(line_no_, column(), msg);
  }

  bool consume(std::string_view s) {
    skip_space();
    if (line_.substr(pos_, s.size()) == s) {
      pos_ += s.size();
      return true;
    }
    return false;
  }

  std::string identifier() {
    skip_space();
    std::size_t begin = pos_;
    while (pos_ < line_.size()) {
      char c = line_[pos_];
      bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' ||
                (pos_ > begin && c >= '0' && c <= '9');
      if (!ok) break;
      ++pos_;
    }
    if (pos_ == begin) fail("expected a nonterminal name");
    return std::string(line_.substr(begin, pos_ - begin));
  }

  std::string rest() {
    skip_space();
    std::string_view r = line_.substr(pos_);
    while (!r.empty() && (r.back() == ' ' || r.back() == '\t' || r.back() == '\r'))
      r.remove_suffix(1);
    pos_ = line_.size();
    return std::string(r);
  }

  unsigned char escape() {
    // Called with pos_ on the character after the backslash.
    if (pos_ >= line_.size()) fail("dangling escape");
    char c = line_[pos_++];
    switch (c) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case 'x': {
        if (pos_ + 2 > line_.size()) fail("truncated \\x escape");
        unsigned v = 0;
        for (int k = 0; k < 2; ++k) {
          char h = line_[pos_++];
          v <<= 4;
          if (h >= '0' && h <= '9') v |= static_cast<unsigned>(h - '0');
          else if (h >= 'a' && h <= 'f') v |= static_cast<unsigned>(h - 'a' + 10);
          else if (h >= 'A' && h <= 'F') v |= static_cast<unsigned>(h - 'A' + 10);
          else fail("bad hex digit in \\x escape");
        }
        return static_cast<unsigned char>(v);
      }
      case '"': case '\\': case ']': case '[': case '^': case '-':
        return static_cast<unsigned char>(c);
      default:
        --pos_;
        fail(std::string("unknown escape \\") + c);
    }
  }

  std::string literal() {
    ++pos_;  // opening quote
    std::string out;
    while (true) {
      if (pos_ >= line_.size()) fail("unterminated string literal");
      char c = line_[pos_++];
      if (c == '"') return out;
      if (c == '\\')
        out += static_cast<char>(escape());
      else
        out += c;
    }
  }

  CharSet char_class() {
    std::size_t open_col = column();
    ++pos_;  // [
    bool negate = false;
    if (pos_ < line_.size() && line_[pos_] == '^') {
      negate = true;
      ++pos_;
    }
    CharSet cs;
    bool any = false;
    auto read_char = [&]() -> unsigned char {
      if (pos_ >= line_.size()) fail("unterminated character class");
      char c = line_[pos_++];
      if (c == '\\') return escape();
      return static_cast<unsigned char>(c);
    };
    while (true) {
      if (pos_ >= line_.size()) fail("unterminated character class");
      if (line_[pos_] == ']') {
        ++pos_;
        break;
      }
      unsigned char lo = read_char();
      any = true;
      if (pos_ + 1 < line_.size() && line_[pos_] == '-' && line_[pos_ + 1] != ']') {
        ++pos_;
        unsigned char hi = read_char();
        if (hi < lo) fail("reversed range in character class");
        cs |= CharSet::range(lo, hi);
      } else {
        cs.insert(lo);
      }
    }
    if (!any) throw SyntaxError(line_no_, open_col, "empty character class");
    if (negate) cs = cs.complement();
    if (cs.empty()) throw SyntaxError(line_no_, open_col, "character class matches nothing");
    return cs;
  }

 private:
  std::string_view line_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

struct Reference {
  std::string name;
  std::size_t line;
  std::size_t column;
};

}  // namespace

Grammar parse_grammar(std::string_view text) {
  std::optional<std::string> start;
  std::string version;
  std::vector<Production> productions;
  std::vector<Reference> references;

  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;

    LineScanner sc(line, line_no);
    if (sc.at_end()) continue;
    if (sc.peek() == '@') {
      if (sc.consume("@start")) {
        if (start) sc.fail("duplicate @start directive");
        start = sc.identifier();
        if (!sc.at_end()) sc.fail("unexpected text after @start name");
      } else if (sc.consume("@version")) {
        version = sc.rest();
      } else {
        sc.fail("unknown directive");
      }
      continue;
    }

    std::string lhs = sc.identifier();
    if (!sc.consume("->")) sc.fail("expected '->'");
    std::vector<Symbol> rhs;
    std::size_t alt_col = sc.column();
    auto finish_alt = [&]() {
      if (rhs.empty()) throw SyntaxError(line_no, alt_col, "empty alternative; write \"\" for epsilon");
      bool has_eps = std::any_of(rhs.begin(), rhs.end(), [](const Symbol& s) { return s.is_epsilon(); });
      if (has_eps && rhs.size() != 1)
        throw SyntaxError(line_no, alt_col, "\"\" must be the entire alternative");
      productions.push_back({lhs, std::move(rhs)});
      rhs.clear();
    };
    while (!sc.at_end()) {
      char c = sc.peek();
      if (c == '|') {
        sc.consume("|");
        finish_alt();
        alt_col = sc.column();
      } else if (c == '"') {
        rhs.push_back(Symbol::terminal(sc.literal()));
      } else if (c == '[') {
        rhs.push_back(Symbol::char_class(sc.char_class()));
      } else {
        std::size_t col = sc.column();
        std::string name = sc.identifier();
        references.push_back({name, line_no, col});
        rhs.push_back(Symbol::nonterminal(std::move(name)));
      }
    }
    finish_alt();
  }

  if (productions.empty()) throw SyntaxError(line_no, 1, "grammar has no rules");
  std::set<std::string> defined;
  for (const auto& p : productions) defined.insert(p.lhs);
  for (const auto& r : references)
    if (!defined.count(r.name))
      throw Error(ErrorCode::kUndefinedNonterminal,
                  "line " + std::to_string(r.line) + ", column " + std::to_string(r.column) +
                      ": undefined nonterminal '" + r.name + "'");
  std::string start_name = start ? *start : productions.front().lhs;
  if (!defined.count(start_name))
    throw Error(ErrorCode::kUndefinedNonterminal,
                "start symbol '" + start_name + "' has no productions");
  return Grammar(std::move(start_name), std::move(productions), std::move(version));
}

std::string serialize_grammar(const Grammar& g) {
  std::string out = "@start " + g.start() + "\n";
  if (!g.version_tag().empty()) out += "@version " + g.version_tag() + "\n";
  for (const auto& p : g.productions()) {
    out += p.lhs;
    out += " ->";
    for (const auto& s : p.rhs) {
      out += ' ';
      out += symbol_text(s);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Analyses

Grammar reduce(const Grammar& g) {
  const std::size_t n = g.nonterminal_count();
  std::vector<bool> productive(n, false);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < g.productions().size(); ++i) {
      std::size_t lhs = g.lhs_id(i);
      if (productive[lhs]) continue;
      bool ok = true;
      for (std::size_t k = 0; k < g.rhs_length(i) && ok; ++k) {
        std::int32_t nt = g.rhs_nonterminal(i, k);
        if (nt >= 0) ok = productive[static_cast<std::size_t>(nt)];
      }
      if (ok) productive[lhs] = changed = true;
    }
  }
  if (!productive[g.start_id()])
    throw Error(ErrorCode::kEmptyLanguage,
                "start symbol '" + g.start() + "' derives no terminal string");

  auto usable = [&](std::size_t prod) {
    for (std::size_t k = 0; k < g.rhs_length(prod); ++k) {
      std::int32_t nt = g.rhs_nonterminal(prod, k);
      if (nt >= 0 && !productive[static_cast<std::size_t>(nt)]) return false;
    }
    return true;
  };

  std::vector<bool> reachable(n, false);
  std::vector<std::size_t> stack{g.start_id()};
  reachable[g.start_id()] = true;
  while (!stack.empty()) {
    std::size_t nt = stack.back();
    stack.pop_back();
    for (std::size_t p : g.productions_of(nt)) {
      if (!usable(p)) continue;
      for (std::size_t k = 0; k < g.rhs_length(p); ++k) {
        std::int32_t child = g.rhs_nonterminal(p, k);
        if (child >= 0 && !reachable[static_cast<std::size_t>(child)]) {
          reachable[static_cast<std::size_t>(child)] = true;
          stack.push_back(static_cast<std::size_t>(child));
        }
      }
    }
  }

  std::vector<Production> kept;
  for (std::size_t i = 0; i < g.productions().size(); ++i)
    if (reachable[g.lhs_id(i)] && usable(i)) kept.push_back(g.productions()[i]);
  return Grammar(g.start(), std::move(kept), g.version_tag());
}

std::set<std::string> nullable_set(const Grammar& g) {
  std::set<std::string> out;
  for (std::size_t nt = 0; nt < g.nonterminal_count(); ++nt)
    if (g.nullable(nt)) out.insert(g.nonterminal_name(nt));
  return out;
}

CharSet terminal_alphabet(const Grammar& g) {
  CharSet cs;
  for (const auto& p : g.productions())
    for (const auto& s : p.rhs) {
      if (s.is_char_class()) cs |= s.chars;
      if (s.is_terminal())
        for (unsigned char c : s.text) cs.insert(c);
    }
  return cs;
}

std::set<std::string> enumerate_language(const Grammar& g, std::size_t max_len) {
  const std::size_t n = g.nonterminal_count();
  const auto& prods = g.productions();
  auto too_many = [] { throw Error(ErrorCode::kExplosion, "language enumeration exceeded the string limit"); };

  // Shortest yield per nonterminal, used to prune splits that cannot fit.
  constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max() / 4;
  std::vector<std::size_t> shortest(n, kUnreachable);
  auto symbol_min = [&](std::size_t i, std::size_t k) -> std::size_t {
    const Symbol& s = prods[i].rhs[k];
    if (s.is_terminal()) return s.text.size();
    if (s.is_char_class()) return s.chars.empty() ? kUnreachable : 1;
    return shortest[static_cast<std::size_t>(g.rhs_nonterminal(i, k))];
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < prods.size(); ++i) {
      std::size_t len = 0;
      for (std::size_t k = 0; k < g.rhs_length(i); ++k) len = std::min(kUnreachable, len + symbol_min(i, k));
      auto& t = shortest[g.lhs_id(i)];
      if (len < t) t = len, changed = true;
    }
  }

  // by_len[A][l] holds the strings of A with exactly l bytes. Lengths are
  // filled in increasing order; within one length, unit and nullable chains
  // need a fixed point.
  std::vector<std::vector<std::set<std::string>>> by_len(n, std::vector<std::set<std::string>>(max_len + 1));
  std::vector<std::size_t> total(n, 0);
  std::string buf;

  for (std::size_t len = 0; len <= max_len; ++len) {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < prods.size(); ++i) {
        const std::size_t rhs = g.rhs_length(i);
        std::vector<std::size_t> tail(rhs + 1, 0);
        for (std::size_t k = rhs; k-- > 0;) tail[k] = std::min(kUnreachable, tail[k + 1] + symbol_min(i, k));
        if (tail[0] > len) continue;
        const std::size_t lhs = g.lhs_id(i);
        auto& target = by_len[lhs][len];
        auto expand = [&](auto&& self, std::size_t k, std::size_t left) -> void {
          if (k == rhs) {
            if (left == 0 && target.insert(buf).second) {
              changed = true;
              if (++total[lhs] > kEnumerationLimit) too_many();
            }
            return;
          }
          if (tail[k] > left) return;
          const Symbol& s = prods[i].rhs[k];
          const std::size_t mark = buf.size();
          if (s.is_terminal()) {
            buf += s.text;
            self(self, k + 1, left - s.text.size());
          } else if (s.is_char_class()) {
            s.chars.for_each([&](unsigned char c) {
              buf.push_back(static_cast<char>(c));
              self(self, k + 1, left - 1);
              buf.resize(mark);
            });
          } else {
            const auto& sets = by_len[static_cast<std::size_t>(g.rhs_nonterminal(i, k))];
            for (std::size_t l = 0; l + tail[k + 1] <= left; ++l)
              for (const auto& w : sets[l]) {
                buf += w;
                self(self, k + 1, left - l);
                buf.resize(mark);
              }
          }
          buf.resize(mark);
        };
        buf.clear();
        expand(expand, 0, len);
      }
    }
  }

  std::set<std::string> out;
  for (auto& set : by_len[g.start_id()]) out.merge(set);
  return out;
}

}  // namespace clamp
