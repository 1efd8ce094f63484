#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "thermoform/errors.hpp"

namespace thermoform {

using Symbol = std::uint32_t;
using Word = std::vector<Symbol>;

inline constexpr std::uint64_t kDefaultWordBudget = std::uint64_t{1} << 25;

/// One-sided full shift or subshift of finite type over {0, ..., m-1}.
class ShiftSpace {
 public:
  static ShiftSpace full(std::size_t alphabet_size,
                         std::uint64_t word_budget = kDefaultWordBudget);
  /// transitions[a][b] == true iff b may follow a. Every symbol needs at
  /// least one successor and one predecessor.
  static ShiftSpace subshift(std::vector<std::vector<bool>> transitions,
                             std::uint64_t word_budget = kDefaultWordBudget);

  std::size_t alphabet_size() const { return alphabet_size_; }
  bool is_full() const { return !transitions_.has_value(); }
  std::uint64_t word_budget() const { return word_budget_; }
  ShiftSpace with_word_budget(std::uint64_t budget) const;

  bool allowed(Symbol from, Symbol to) const {
    return !transitions_ || (*transitions_)[from * alphabet_size_ + to];
  }
  bool is_admissible(std::span<const Symbol> word) const;
  const std::optional<std::vector<bool>>& transitions() const { return transitions_; }

  /// Number of admissible words of length n, by transfer-matrix powers.
  /// Throws BudgetExceeded if the count does not fit in 64 bits.
  std::uint64_t word_count(std::size_t n) const;
  /// Throws BudgetExceeded when word_count(n) exceeds the word budget.
  void check_budget(std::size_t n) const;

  /// Admissible words of length n in lexicographic order.
  std::vector<Word> enumerate_words(std::size_t n) const;

  /// Admissible prefixes of a common length p <= n whose cylinders partition
  /// the length-n words. p is the smallest length giving at least
  /// `min_parts` prefixes, so the result depends only on (space, n, min_parts).
  std::vector<Word> partition_prefixes(std::size_t n, std::size_t min_parts) const;

  friend bool operator==(const ShiftSpace&, const ShiftSpace&) = default;

 private:
  ShiftSpace() = default;
  std::size_t alphabet_size_ = 0;
  std::optional<std::vector<bool>> transitions_;  // row-major m x m
  std::uint64_t word_budget_ = kDefaultWordBudget;
};

/// Depth-first walk over admissible length-n words that start with `prefix`,
/// in lexicographic order. The visitor sees the descent symbol by symbol so
/// that prefix data (partial matrix products, partial sums, cylinder masses)
/// can be reused:
///   bool enter(Symbol)   -- return false to prune the subtree
///   void leave()         -- matching exit for each accepted enter
///   void leaf(std::span<const Symbol> word)
template <class Visitor>
void walk_words(const ShiftSpace& space, std::size_t n, std::span<const Symbol> prefix,
                Visitor& visitor) {
  if (n == 0) throw InvalidArgument("word length must be >= 1");
  if (prefix.size() > n) throw InvalidArgument("prefix longer than word length");
  if (!space.is_admissible(prefix)) return;
  const auto m = static_cast<Symbol>(space.alphabet_size());

  Word word(prefix.begin(), prefix.end());
  word.reserve(n);
  std::size_t entered = 0;
  for (Symbol s : prefix) {
    if (!visitor.enter(s)) {
      for (; entered > 0; --entered) visitor.leave();
      return;
    }
    ++entered;
  }
  if (word.size() == n) {
    visitor.leaf(std::span<const Symbol>(word));
  } else {
    const std::size_t base = word.size();
    // next[d] is the next candidate symbol at depth base + d.
    std::vector<Symbol> next(n - base, 0);
    std::size_t depth = 0;
    while (true) {
      Symbol& cand = next[depth];
      const std::size_t pos = base + depth;
      while (cand < m && pos > 0 && !space.allowed(word[pos - 1], cand)) ++cand;
      if (cand == m) {
        if (depth == 0) break;
        --depth;
        word.pop_back();
        visitor.leave();
        ++next[depth];
        continue;
      }
      const Symbol s = cand;
      if (!visitor.enter(s)) {
        ++cand;
        continue;
      }
      word.push_back(s);
      if (pos + 1 == n) {
        visitor.leaf(std::span<const Symbol>(word));
        word.pop_back();
        visitor.leave();
        ++cand;
      } else {
        ++depth;
        next[depth] = 0;
      }
    }
  }
  for (; entered > 0; --entered) visitor.leave();
}

/// Calls fn(word) for every admissible word of length n, lexicographically.
template <class Fn>
void for_each_word(const ShiftSpace& space, std::size_t n, Fn&& fn) {
  struct V {
    Fn& fn;
    bool enter(Symbol) { return true; }
    void leave() {}
    void leaf(std::span<const Symbol> w) { fn(w); }
  } v{fn};
  walk_words(space, n, {}, v);
}

/// Higher-block presentation: the SFT whose symbols are the admissible words
/// of length k, with u -> v allowed when they overlap in k-1 symbols.
struct BlockRecoding {
  ShiftSpace space;
  std::vector<Word> blocks;  // symbol index -> block
};
BlockRecoding higher_block_recoding(const ShiftSpace& space, std::size_t k);

}  // namespace thermoform
