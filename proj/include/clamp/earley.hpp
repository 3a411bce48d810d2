#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "clamp/grammar.hpp"

namespace clamp {

// A dotted production. `offset` counts bytes already matched inside the
// literal at the dot, so a column can sit in the middle of a terminal.
struct EarleyItem {
  std::uint32_t production = 0;
  std::uint32_t dot = 0;
  std::uint32_t origin = 0;
  std::uint32_t offset = 0;

  bool operator==(const EarleyItem&) const = default;
};

namespace detail {

struct Column {
  std::vector<EarleyItem> items;
  // (nonterminal id, item index) for items whose dot sits before a
  // nonterminal, sorted for completion lookups from later columns.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> waiting;
  // Items whose dot sits before a literal or character class.
  std::vector<std::uint32_t> scannable;
  CharSet next_chars;
  bool complete = false;
};

struct ColumnNode;

}  // namespace detail

/// Earley chart after consuming a byte prefix.
///
/// A state is a value: advance() returns a new state and never touches the
/// receiver. Past columns are immutable and shared between a state and the
/// states forked from it.
class PrefixState {
 public:
  // The grammar is reduced first if it is not already.
  static PrefixState initial(std::shared_ptr<const Grammar> grammar);
  static PrefixState initial(const Grammar& grammar);

  std::optional<PrefixState> advance(unsigned char c) const;
  // Advances byte by byte; nullopt as soon as one byte is rejected.
  std::optional<PrefixState> advance(std::string_view text) const;

  // Bytes c for which advance(c) succeeds, read off the frontier column.
  const CharSet& allowed_next_chars() const;
  // The consumed prefix is itself a member of the language.
  bool is_complete() const;
  std::size_t consumed() const;

  const Grammar& grammar() const { return *grammar_; }
  const std::shared_ptr<const Grammar>& grammar_ptr() const { return grammar_; }
  std::span<const EarleyItem> frontier_items() const;

 private:
  PrefixState(std::shared_ptr<const Grammar> g, std::shared_ptr<const detail::ColumnNode> n)
      : grammar_(std::move(g)), node_(std::move(n)) {}

  std::shared_ptr<const Grammar> grammar_;
  std::shared_ptr<const detail::ColumnNode> node_;
};

// Whole-string membership.
bool recognize(const Grammar& grammar, std::string_view text);

// Offset of the first byte that makes the prefix non-viable, or nullopt when
// the whole input is a viable prefix.
std::optional<std::size_t> first_rejection(const PrefixState& from, std::string_view text);

}  // namespace clamp
