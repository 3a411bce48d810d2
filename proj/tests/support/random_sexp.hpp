#pragma once

#include <string>

#include "clamp/random.hpp"
#include "clamp/sexp.hpp"

namespace testsupport {

inline std::string random_atom(clamp::SplitMix64& rng) {
  static const std::string chars = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._?~=!<>+-*:";
  std::string s;
  const auto len = 1 + rng.below(8);
  for (std::uint64_t i = 0; i < len; ++i) s += chars[rng.below(chars.size())];
  return s;
}

inline std::string random_string_body(clamp::SplitMix64& rng) {
  static const std::string chars = "ab xy()\"\\\t;";
  std::string s;
  const auto len = rng.below(7);
  for (std::uint64_t i = 0; i < len; ++i) s += chars[rng.below(chars.size())];
  return s;
}

inline clamp::sexp::Node random_tree(clamp::SplitMix64& rng, int depth) {
  using clamp::sexp::Node;
  const auto roll = rng.below(10);
  if (depth <= 0 || roll < 3) return roll == 0 ? Node::string(random_string_body(rng)) : Node::atom(random_atom(rng));
  std::vector<Node> kids;
  const auto n = rng.below(5);
  for (std::uint64_t i = 0; i < n; ++i) kids.push_back(random_tree(rng, depth - 1));
  return Node::list(std::move(kids));
}

// Printer with random runs of whitespace wherever the syntax allows them.
inline void print_spaced(const clamp::sexp::Node& n, clamp::SplitMix64& rng, std::string& out) {
  auto gap = [&](bool required) {
    static const char ws[] = {' ', '\t', '\n', '\r'};
    auto len = rng.below(4) + (required ? 1 : 0);
    for (std::uint64_t i = 0; i < len; ++i) out += ws[rng.below(4)];
  };
  using Kind = clamp::sexp::Node::Kind;
  if (n.kind == Kind::kAtom) {
    out += n.text;
  } else if (n.kind == Kind::kString) {
    out += '"';
    for (char c : n.text) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    out += '"';
  } else {
    out += '(';
    gap(false);
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      if (i) gap(true);
      print_spaced(n.children[i], rng, out);
    }
    gap(false);
    out += ')';
  }
}

inline std::string spaced(const clamp::sexp::Node& n, clamp::SplitMix64& rng) {
  std::string out;
  if (rng.below(2)) out += ' ';
  print_spaced(n, rng, out);
  if (rng.below(2)) out += '\n';
  return out;
}

// A tree that differs from `n` in structure or in a leaf. Picks a random
// node and applies one edit that is guaranteed to change it.
inline clamp::sexp::Node perturb(const clamp::sexp::Node& n, clamp::SplitMix64& rng) {
  using clamp::sexp::Node;
  Node out = n;
  std::vector<Node*> nodes;
  auto collect = [&](auto&& self, Node& x) -> void {
    nodes.push_back(&x);
    for (auto& c : x.children) self(self, c);
  };
  collect(collect, out);
  Node& target = *nodes[rng.below(nodes.size())];
  switch (rng.below(4)) {
    case 0:  // wrap in a one-element list
      target = Node::list({target});
      break;
    case 1:  // edit a leaf, or append a child to a list
      if (target.is_list())
        target.children.push_back(Node::atom("extra"));
      else
        target.text += "x";
      break;
    case 2:  // remove a child, or turn a leaf into an empty list
      if (target.is_list() && !target.children.empty())
        target.children.erase(target.children.begin() + static_cast<std::ptrdiff_t>(rng.below(target.children.size())));
      else if (target.is_list())
        target = Node::atom("nil");
      else
        target = Node::list({});
      break;
    default:  // flip atom and string
      if (target.kind == Node::Kind::kAtom)
        target.kind = Node::Kind::kString;
      else if (target.kind == Node::Kind::kString)
        target = Node::atom(target.text.empty() ? "e" : random_atom(rng) + "s");
      else
        target.children.insert(target.children.begin(), Node::list({}));
      break;
  }
  return out;
}

}  // namespace testsupport
