#include "thermoform/symbolic.hpp"

#include <algorithm>
#include <string>

namespace thermoform {

ShiftSpace ShiftSpace::full(std::size_t alphabet_size, std::uint64_t word_budget) {
  if (alphabet_size < 2) throw InvalidArgument("alphabet_size must be >= 2");
  ShiftSpace s;
  s.alphabet_size_ = alphabet_size;
  s.word_budget_ = word_budget;
  return s;
}

ShiftSpace ShiftSpace::subshift(std::vector<std::vector<bool>> transitions,
                                std::uint64_t word_budget) {
  const std::size_t m = transitions.size();
  if (m < 2) throw InvalidArgument("alphabet_size must be >= 2");
  std::vector<bool> flat(m * m, false);
  std::vector<bool> has_pred(m, false);
  for (std::size_t a = 0; a < m; ++a) {
    if (transitions[a].size() != m) throw InvalidArgument("transition matrix must be square");
    bool has_succ = false;
    for (std::size_t b = 0; b < m; ++b) {
      if (transitions[a][b]) {
        flat[a * m + b] = true;
        has_succ = true;
        has_pred[b] = true;
      }
    }
    if (!has_succ) throw InvalidArgument("symbol " + std::to_string(a) + " has no successor");
  }
  for (std::size_t b = 0; b < m; ++b)
    if (!has_pred[b]) throw InvalidArgument("symbol " + std::to_string(b) + " has no predecessor");
  ShiftSpace s;
  s.alphabet_size_ = m;
  s.word_budget_ = word_budget;
  if (!std::all_of(flat.begin(), flat.end(), [](bool x) { return x; })) s.transitions_ = std::move(flat);
  return s;
}

ShiftSpace ShiftSpace::with_word_budget(std::uint64_t budget) const {
  ShiftSpace s = *this;
  s.word_budget_ = budget;
  return s;
}

bool ShiftSpace::is_admissible(std::span<const Symbol> word) const {
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (word[i] >= alphabet_size_) return false;
    if (i > 0 && !allowed(word[i - 1], word[i])) return false;
  }
  return true;
}

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw BudgetExceeded("word count overflows 64 bits");
  return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw BudgetExceeded("word count overflows 64 bits");
  return r;
}

}  // namespace

std::uint64_t ShiftSpace::word_count(std::size_t n) const {
  if (n == 0) throw InvalidArgument("word length must be >= 1");
  const std::size_t m = alphabet_size_;
  if (is_full()) {
    std::uint64_t c = 1;
    for (std::size_t i = 0; i < n; ++i) c = checked_mul(c, m);
    return c;
  }
  // ends[b] = number of admissible words of the current length ending in b;
  // one step multiplies by the transition matrix, i.e. ones^T A^{n-1}.
  std::vector<std::uint64_t> ends(m, 1), next(m);
  for (std::size_t len = 1; len < n; ++len) {
    std::fill(next.begin(), next.end(), 0);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        if ((*transitions_)[a * m + b]) next[b] = checked_add(next[b], ends[a]);
    ends.swap(next);
  }
  std::uint64_t total = 0;
  for (auto c : ends) total = checked_add(total, c);
  return total;
}

void ShiftSpace::check_budget(std::size_t n) const {
  std::uint64_t c;
  try {
    c = word_count(n);
  } catch (const BudgetExceeded&) {
    throw BudgetExceeded("word count at length " + std::to_string(n) + " overflows");
  }
  if (c > word_budget_)
    throw BudgetExceeded("length " + std::to_string(n) + " has " + std::to_string(c) +
                         " words, budget is " + std::to_string(word_budget_));
}

std::vector<Word> ShiftSpace::enumerate_words(std::size_t n) const {
  check_budget(n);
  std::vector<Word> out;
  out.reserve(word_count(n));
  for_each_word(*this, n, [&](std::span<const Symbol> w) { out.emplace_back(w.begin(), w.end()); });
  return out;
}

std::vector<Word> ShiftSpace::partition_prefixes(std::size_t n, std::size_t min_parts) const {
  if (n == 0) throw InvalidArgument("word length must be >= 1");
  std::size_t p = 1;
  while (p < n && word_count(p) < min_parts) ++p;
  std::vector<Word> out;
  for_each_word(*this, p, [&](std::span<const Symbol> w) { out.emplace_back(w.begin(), w.end()); });
  return out;
}

BlockRecoding higher_block_recoding(const ShiftSpace& space, std::size_t k) {
  if (k == 0) throw InvalidArgument("block length must be >= 1");
  space.check_budget(k);
  BlockRecoding r{ShiftSpace::full(2), space.enumerate_words(k)};
  const std::size_t b = r.blocks.size();
  std::vector<std::vector<bool>> t(b, std::vector<bool>(b, false));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const Word& u = r.blocks[i];
      const Word& v = r.blocks[j];
      t[i][j] = std::equal(u.begin() + 1, u.end(), v.begin()) && space.allowed(u.back(), v.back());
    }
  }
  r.space = b >= 2 ? ShiftSpace::subshift(std::move(t), space.word_budget())
                   : throw InvalidArgument("recoding has fewer than two blocks");
  return r;
}

}  // namespace thermoform
