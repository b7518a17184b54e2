#include "qfsum/rouge.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qfsum/error.hpp"

namespace qfsum {
namespace {

using testing::brute_force_rouge;
using testing::random_tokens;

std::size_t unit_total(const SuUnitCounts& units) {
  std::size_t n = 0;
  for (const auto& [u, c] : units) n += c;
  return n;
}

TEST(SuUnits, ThreeTokens) {
  const auto units = su_units({"a", "b", "c"});
  EXPECT_EQ(unit_total(units), 6u);
  for (const auto& u : {SuUnit{"a", ""}, SuUnit{"b", ""}, SuUnit{"c", ""}, SuUnit{"a", "b"}, SuUnit{"a", "c"},
                        SuUnit{"b", "c"}}) {
    EXPECT_EQ(units.count(u), 1u) << u.first << "," << u.second;
  }
}

TEST(SuUnits, SingleToken) {
  const auto units = su_units({"a"});
  EXPECT_EQ(unit_total(units), 1u);
  EXPECT_TRUE(units.begin()->first.is_unigram());
}

TEST(SuUnits, GapBoundary) {
  const auto units = su_units({"a", "b", "c", "d", "e", "f", "g"});
  EXPECT_EQ(units.count({"a", "f"}), 1u);  // four tokens in between
  EXPECT_EQ(units.count({"a", "g"}), 0u);  // five tokens in between
  EXPECT_EQ(unit_total(units), su_unit_count(7));
}

TEST(SuUnits, RepeatedTokensKeepMultiplicity) {
  const auto units = su_units({"a", "a", "a"});
  EXPECT_EQ(units.at({"a", ""}), 3u);
  EXPECT_EQ(units.at({"a", "a"}), 3u);
}

TEST(RougeSu4, Identity) {
  const auto t = tokenize("the cat sat");
  EXPECT_DOUBLE_EQ(rouge_su4(t, t).f1, 1.0);
}

TEST(RougeSu4, Disjoint) { EXPECT_EQ(rouge_su4({"a", "b"}, {"c", "d"}).f1, 0.0); }

TEST(RougeSu4, HalfOverlap) {
  const auto s = rouge_su4({"a", "b", "c"}, {"a", "b", "d"});
  EXPECT_EQ(s.match_count, 3u);
  EXPECT_EQ(s.candidate_units, 6u);
  EXPECT_EQ(s.reference_units, 6u);
  EXPECT_EQ(s.precision, 0.5);
  EXPECT_EQ(s.recall, 0.5);
  EXPECT_EQ(s.f1, 0.5);
}

TEST(RougeSu4, EmptySides) {
  const auto s = rouge_su4({}, {"a"});
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_EQ(s.f1, 0.0);
  EXPECT_EQ(rouge_su4({}, {}).f1, 0.0);
}

TEST(RougeSu4, ClippedCounting) {
  // "a a a a" vs "a": only one unigram can match.
  const auto s = rouge_su4({"a", "a", "a", "a"}, {"a"});
  EXPECT_EQ(s.match_count, 1u);
}

TEST(RougeSu4, BetaWeighting) {
  RougeConfig cfg;
  cfg.beta = 2.0;
  const auto s = rouge_su4({"a", "b"}, {"a", "b", "c", "d"}, cfg);
  EXPECT_NEAR(s.f1, 5.0 * s.precision * s.recall / (4.0 * s.precision + s.recall), 1e-15);
  cfg.beta = 0.0;
  EXPECT_THROW(rouge_su4({"a"}, {"a"}, cfg), Error);
}

TEST(RougeSu4, MatchesBruteForceOracle) {
  std::uint64_t state = 42;
  for (int i = 0; i < 300; ++i) {
    const auto c = random_tokens(state, 20, 12);
    const auto r = random_tokens(state, 20, 12);
    const auto s = rouge_su4(c, r);
    const auto b = brute_force_rouge(c, r);
    ASSERT_EQ(s.match_count, b.match);
    ASSERT_EQ(s.candidate_units, b.candidate_units);
    ASSERT_EQ(s.reference_units, b.reference_units);
    ASSERT_NEAR(s.f1, b.f1, 1e-12);
  }
}

TEST(RougeSu4, Properties) {
  std::uint64_t state = 9;
  for (int i = 0; i < 200; ++i) {
    const auto a = random_tokens(state, 8, 12);
    const auto b = random_tokens(state, 8, 12);
    const auto ab = rouge_su4(a, b);
    const auto ba = rouge_su4(b, a);
    EXPECT_EQ(ab.precision, ba.recall);
    EXPECT_EQ(ab.f1, ba.f1);
    EXPECT_LE(ab.match_count, std::min(ab.candidate_units, ab.reference_units));
    EXPECT_GE(ab.f1, 0.0);
    EXPECT_LE(ab.f1, 1.0);
  }
}

TEST(RougeSu4Multi, Cases) {
  const TokenList cand{"a", "b", "c"};
  const std::vector<TokenList> one{{"a", "b", "d"}};
  EXPECT_EQ(rouge_su4_multi(cand, one), rouge_su4(cand, one[0]).f1);
  const std::vector<TokenList> self_and_disjoint{cand, {"x", "y"}};
  EXPECT_EQ(rouge_su4_multi(cand, self_and_disjoint), 1.0);
  const std::vector<TokenList> half_and_disjoint{{"a", "b", "d"}, {"x", "y"}};
  EXPECT_EQ(rouge_su4_multi(cand, half_and_disjoint), 0.5);
  EXPECT_THROW(rouge_su4_multi(cand, std::vector<TokenList>{}), Error);
}

TEST(RougeSu4Multi, AddingReferencesNeverDecreases) {
  std::uint64_t state = 77;
  for (int i = 0; i < 50; ++i) {
    const auto cand = random_tokens(state, 10, 12);
    std::vector<TokenList> refs{random_tokens(state, 10, 12)};
    double prev = rouge_su4_multi(cand, refs);
    for (int k = 0; k < 4; ++k) {
      refs.push_back(random_tokens(state, 10, 12));
      const double now = rouge_su4_multi(cand, refs);
      EXPECT_GE(now, prev);
      prev = now;
    }
  }
}

}  // namespace
}  // namespace qfsum
