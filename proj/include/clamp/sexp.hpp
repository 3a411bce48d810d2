#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace clamp::sexp {

// An atom, a quoted string or a list. String nodes keep the decoded text;
// the quotes are restored by canonical().
struct Node {
  enum class Kind { kAtom, kString, kList };

  Kind kind = Kind::kAtom;
  std::string text;
  std::vector<Node> children;

  static Node atom(std::string s) { return {Kind::kAtom, std::move(s), {}}; }
  static Node string(std::string s) { return {Kind::kString, std::move(s), {}}; }
  static Node list(std::vector<Node> kids) { return {Kind::kList, {}, std::move(kids)}; }

  bool is_list() const { return kind == Kind::kList; }
  bool operator==(const Node&) const = default;
};

// Throws clamp::SyntaxError (line 1, column = byte offset + 1) on unbalanced
// parentheses, trailing input, or an unterminated string.
Node parse(std::string_view text);

// Single spaces between elements, none inside the parentheses.
std::string canonical(const Node& n);

// Structural equality of two programs. A side that fails to parse makes the
// comparison fail; `parse_failed` tells the caller which case it was.
bool lispress_equal(std::string_view a, std::string_view b, bool* parse_failed = nullptr);

}  // namespace clamp::sexp
