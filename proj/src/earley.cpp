#include "clamp/earley.hpp"

#include <algorithm>
#include <unordered_set>

namespace clamp {

namespace detail {

struct ColumnNode {
  Column column;
  std::shared_ptr<const ColumnNode> prev;
  // history[i] is column i; the last entry is this node's own column.
  std::vector<const Column*> history;
};

}  // namespace detail

namespace {

using detail::Column;
using detail::ColumnNode;

struct ItemHash {
  std::size_t operator()(const EarleyItem& it) const noexcept {
    std::uint64_t h = it.production;
    h = h * 0x9E3779B97F4A7C15ULL + it.dot;
    h = h * 0x9E3779B97F4A7C15ULL + it.origin;
    h = h * 0x9E3779B97F4A7C15ULL + it.offset;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

class ColumnBuilder {
 public:
  ColumnBuilder(const Grammar& g, std::span<const Column* const> history, std::uint32_t index)
      : g_(g), history_(history), index_(index) {}

  void add(const EarleyItem& it) {
    if (seen_.insert(it).second) col_.items.push_back(it);
  }

  Column close() {
    for (std::size_t i = 0; i < col_.items.size(); ++i) {
      const EarleyItem it = col_.items[i];
      const std::size_t len = g_.rhs_length(it.production);
      if (it.dot == len) {
        complete(it);
        continue;
      }
      std::int32_t nt = g_.rhs_nonterminal(it.production, it.dot);
      if (nt < 0) continue;
      for (std::size_t p : g_.productions_of(static_cast<std::size_t>(nt)))
        add({static_cast<std::uint32_t>(p), 0, index_, 0});
      if (g_.nullable(static_cast<std::size_t>(nt)))
        add({it.production, it.dot + 1, it.origin, 0});
    }
    finish();
    return std::move(col_);
  }

 private:
  void complete(const EarleyItem& done) {
    // Empty spans are covered by the nullable shortcut at prediction time.
    if (done.origin == index_) return;
    const auto lhs = static_cast<std::uint32_t>(g_.lhs_id(done.production));
    const Column& from = *history_[done.origin];
    auto range = std::equal_range(
        from.waiting.begin(), from.waiting.end(), std::pair<std::uint32_t, std::uint32_t>{lhs, 0},
        [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto w = range.first; w != range.second; ++w) {
      const EarleyItem& parent = from.items[w->second];
      add({parent.production, parent.dot + 1, parent.origin, 0});
    }
  }

  void finish() {
    const auto start = g_.start_id();
    for (std::uint32_t i = 0; i < col_.items.size(); ++i) {
      const EarleyItem& it = col_.items[i];
      const auto& prod = g_.productions()[it.production];
      if (it.dot == g_.rhs_length(it.production)) {
        if (it.origin == 0 && g_.lhs_id(it.production) == start) col_.complete = true;
        continue;
      }
      std::int32_t nt = g_.rhs_nonterminal(it.production, it.dot);
      if (nt >= 0) {
        col_.waiting.emplace_back(static_cast<std::uint32_t>(nt), i);
        continue;
      }
      col_.scannable.push_back(i);
      const Symbol& s = prod.rhs[it.dot];
      if (s.is_char_class())
        col_.next_chars |= s.chars;
      else
        col_.next_chars.insert(static_cast<unsigned char>(s.text[it.offset]));
    }
    std::sort(col_.waiting.begin(), col_.waiting.end());
  }

  const Grammar& g_;
  std::span<const Column* const> history_;
  std::uint32_t index_;
  Column col_;
  std::unordered_set<EarleyItem, ItemHash> seen_;
};

}  // namespace

PrefixState PrefixState::initial(const Grammar& grammar) {
  return initial(std::make_shared<const Grammar>(grammar));
}

PrefixState PrefixState::initial(std::shared_ptr<const Grammar> grammar) {
  if (!grammar->is_reduced()) grammar = std::make_shared<const Grammar>(reduce(*grammar));
  auto node = std::make_shared<ColumnNode>();
  ColumnBuilder b(*grammar, {}, 0);
  for (std::size_t p : grammar->productions_of(grammar->start_id()))
    b.add({static_cast<std::uint32_t>(p), 0, 0, 0});
  node->column = b.close();
  node->history.push_back(&node->column);
  return PrefixState(std::move(grammar), std::move(node));
}

std::optional<PrefixState> PrefixState::advance(unsigned char c) const {
  const Column& cur = node_->column;
  if (!cur.next_chars.contains(c)) return std::nullopt;

  const Grammar& g = *grammar_;
  auto node = std::make_shared<ColumnNode>();
  node->prev = node_;
  node->history = node_->history;
  const auto index = static_cast<std::uint32_t>(node->history.size());

  ColumnBuilder b(g, node->history, index);
  for (std::uint32_t i : cur.scannable) {
    const EarleyItem& it = cur.items[i];
    const Symbol& s = g.productions()[it.production].rhs[it.dot];
    if (s.is_char_class()) {
      if (s.chars.contains(c)) b.add({it.production, it.dot + 1, it.origin, 0});
      continue;
    }
    if (static_cast<unsigned char>(s.text[it.offset]) != c) continue;
    if (it.offset + 1 == s.text.size())
      b.add({it.production, it.dot + 1, it.origin, 0});
    else
      b.add({it.production, it.dot, it.origin, it.offset + 1});
  }
  node->column = b.close();
  node->history.push_back(&node->column);
  return PrefixState(grammar_, std::move(node));
}

std::optional<PrefixState> PrefixState::advance(std::string_view text) const {
  std::optional<PrefixState> s = *this;
  for (char c : text) {
    s = s->advance(static_cast<unsigned char>(c));
    if (!s) return std::nullopt;
  }
  return s;
}

const CharSet& PrefixState::allowed_next_chars() const { return node_->column.next_chars; }

bool PrefixState::is_complete() const { return node_->column.complete; }

std::size_t PrefixState::consumed() const { return node_->history.size() - 1; }

std::span<const EarleyItem> PrefixState::frontier_items() const { return node_->column.items; }

bool recognize(const Grammar& grammar, std::string_view text) {
  auto s = PrefixState::initial(grammar).advance(text);
  return s && s->is_complete();
}

std::optional<std::size_t> first_rejection(const PrefixState& from, std::string_view text) {
  PrefixState s = from;
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto next = s.advance(static_cast<unsigned char>(text[i]));
    if (!next) return i;
    s = std::move(*next);
  }
  return std::nullopt;
}

}  // namespace clamp
