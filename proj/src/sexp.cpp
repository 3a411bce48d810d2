#include "clamp/sexp.hpp"

#include "clamp/error.hpp"

namespace clamp::sexp {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Node parse_all() {
    skip();
    if (pos_ >= text_.size()) fail("empty input");
    Node n = parse_node();
    skip();
    if (pos_ < text_.size()) fail("trailing input after expression");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(1, pos_ + 1, msg); }

  void skip() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  Node parse_node() {
    char c = text_[pos_];
    if (c == '(') {
      std::size_t open = pos_++;
      std::vector<Node> kids;
      while (true) {
        skip();
        if (pos_ >= text_.size()) {
          pos_ = open;
          fail("unbalanced '('");
        }
        if (text_[pos_] == ')') {
          ++pos_;
          return Node::list(std::move(kids));
        }
        kids.push_back(parse_node());
      }
    }
    if (c == ')') fail("unbalanced ')'");
    if (c == '"') return parse_string();
    std::size_t begin = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' &&
           text_[pos_] != ')' && text_[pos_] != '"')
      ++pos_;
    return Node::atom(std::string(text_.substr(begin, pos_ - begin)));
  }

  Node parse_string() {
    std::size_t open = pos_++;
    std::string out;
    while (true) {
      if (pos_ >= text_.size()) {
        pos_ = open;
        fail("unterminated string");
      }
      char c = text_[pos_++];
      if (c == '"') return Node::string(std::move(out));
      if (c == '\\' && pos_ < text_.size() && (text_[pos_] == '"' || text_[pos_] == '\\')) {
        out += text_[pos_++];
        continue;
      }
      out += c;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void write(const Node& n, std::string& out) {
  switch (n.kind) {
    case Node::Kind::kAtom:
      out += n.text;
      return;
    case Node::Kind::kString:
      out += '"';
      for (char c : n.text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      out += '"';
      return;
    case Node::Kind::kList:
      out += '(';
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ' ';
        write(n.children[i], out);
      }
      out += ')';
      return;
  }
}

}  // namespace

Node parse(std::string_view text) { return Parser(text).parse_all(); }

std::string canonical(const Node& n) {
  std::string out;
  write(n, out);
  return out;
}

bool lispress_equal(std::string_view a, std::string_view b, bool* parse_failed) {
  if (parse_failed) *parse_failed = false;
  try {
    return parse(a) == parse(b);
  } catch (const SyntaxError&) {
    if (parse_failed) *parse_failed = true;
    return false;
  }
}

}  // namespace clamp::sexp
