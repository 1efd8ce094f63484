#include <doctest.h>

#include <algorithm>
#include <set>

#include "support.hpp"
#include "thermoform/measures.hpp"

using namespace testing;

namespace {

bool avoids_11(const Word& w) {
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w[i - 1] == 1 && w[i] == 1) return false;
  return true;
}

ShiftSpace random_sft(Rng& rng, std::size_t m) {
  while (true) {
    std::vector<std::vector<bool>> t(m, std::vector<bool>(m));
    for (auto& row : t)
      for (std::size_t j = 0; j < m; ++j) row[j] = rng.uniform() < 0.6;
    try {
      return ShiftSpace::subshift(t);
    } catch (const InvalidArgument&) {
    }
  }
}

}  // namespace

TEST_CASE("full shift enumerates every word in lexicographic order") {
  const auto space = ShiftSpace::full(2);
  const auto words = space.enumerate_words(3);
  CHECK(words == all_words(2, 3));
  CHECK(words.size() == 8);
  CHECK(ShiftSpace::full(4).enumerate_words(1).size() == 4);
}

TEST_CASE("subshift forbidding 11 keeps five words of length 3") {
  const auto words = golden_mean().enumerate_words(3);
  std::vector<Word> expected;
  for (const auto& w : all_words(2, 3))
    if (avoids_11(w)) expected.push_back(w);
  CHECK(expected.size() == 5);
  CHECK(words == expected);
}

TEST_CASE("word counts") {
  CHECK(ShiftSpace::full(4).word_count(12) == 16777216u);
  CHECK(ShiftSpace::full(2).word_count(1) == 2u);
  // Golden mean counts are Fibonacci numbers F(n+2).
  std::uint64_t f0 = 1, f1 = 2;
  for (std::size_t n = 1; n < 10; ++n) {
    const auto f2 = f0 + f1;
    f0 = f1;
    f1 = f2;
  }
  CHECK(f1 == 144u);
  CHECK(golden_mean().word_count(10) == f1);
}

TEST_CASE("word_count agrees with enumeration on random subshifts") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto space = random_sft(rng, 3);
    for (std::size_t n = 1; n <= 6; ++n) {
      const auto words = space.enumerate_words(n);
      CHECK(words.size() == space.word_count(n));
      CHECK(std::is_sorted(words.begin(), words.end()));
      std::vector<Word> brute;
      for (const auto& w : all_words(3, n))
        if (space.is_admissible(w)) brute.push_back(w);
      CHECK(words == brute);
    }
  }
}

TEST_CASE("full shift counts are monotone and closed under concatenation") {
  const auto space = ShiftSpace::full(3);
  for (std::size_t n = 1; n < 10; ++n) CHECK(space.word_count(n + 1) >= space.word_count(n));
  for (const auto& a : space.enumerate_words(2))
    for (const auto& b : space.enumerate_words(3)) {
      Word ab = a;
      ab.insert(ab.end(), b.begin(), b.end());
      CHECK(space.is_admissible(ab));
    }
}

TEST_CASE("enumeration is deterministic") {
  const auto space = golden_mean();
  CHECK(space.enumerate_words(9) == space.enumerate_words(9));
}

TEST_CASE("partition prefixes split the words into disjoint ordered blocks") {
  for (const auto& space : {ShiftSpace::full(3), golden_mean()}) {
    const std::size_t n = 7;
    const auto prefixes = space.partition_prefixes(n, 8);
    CHECK(prefixes.size() >= 8);
    std::vector<Word> joined;
    for (const auto& p : prefixes) {
      struct V {
        std::vector<Word>* out;
        bool enter(Symbol) { return true; }
        void leave() {}
        void leaf(std::span<const Symbol> w) { out->emplace_back(w.begin(), w.end()); }
      } v{&joined};
      walk_words(space, n, p, v);
    }
    CHECK(joined == space.enumerate_words(n));
    CHECK(space.partition_prefixes(n, 8) == prefixes);
  }
}

TEST_CASE("budget and argument errors") {
  CHECK_THROWS_AS(ShiftSpace::full(4).check_budget(13), BudgetExceeded);
  CHECK_NOTHROW(ShiftSpace::full(4).check_budget(12));
  CHECK_THROWS_AS(ShiftSpace::full(2).with_word_budget(100).check_budget(7), BudgetExceeded);
  CHECK_THROWS_AS(ShiftSpace::full(2).enumerate_words(0), InvalidArgument);
  CHECK_THROWS_AS(ShiftSpace::subshift({{true, false}, {false, false}}), InvalidArgument);
}

TEST_CASE("higher block recoding preserves word counts") {
  for (const auto& space : {ShiftSpace::full(2), golden_mean()}) {
    const std::size_t k = 3;
    const auto rec = higher_block_recoding(space, k);
    CHECK(rec.blocks == space.enumerate_words(k));
    for (std::size_t n = 1; n <= 6; ++n) CHECK(rec.space.word_count(n) == space.word_count(n + k - 1));
  }
}
