#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "musearch/edit_distance.hpp"
#include "oracles.hpp"

using namespace musearch;
using namespace musearch::testing;

namespace {

std::string random_string(Rng& rng, std::size_t max_len, std::string_view alphabet = "+-0") {
  std::string s;
  const auto len = rng.below(max_len + 1);
  for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.below(alphabet.size())];
  return s;
}

}  // namespace

TEST(EditDistance, Identity) {
  EXPECT_EQ(edit_distance("+-0+", "+-0+"), 0.0);
  EXPECT_EQ(edit_distance("", ""), 0.0);
}

TEST(EditDistance, PureInsertions) { EXPECT_EQ(edit_distance("", "+-0"), 3.0); }

TEST(EditDistance, WeightedCosts) {
  const CostModel costs{2.0, 0.5, 3.0};
  EXPECT_EQ(edit_distance("", "ab", costs), 4.0);
  EXPECT_EQ(edit_distance("ab", "", costs), 1.0);
  // substitution (3) is dearer than delete + insert (2.5)
  EXPECT_EQ(edit_distance("a", "b", costs), 2.5);
}

TEST(EditDistance, RejectsNegativeCosts) {
  EXPECT_THROW(validate(CostModel{-1.0, 1.0, 1.0}), std::invalid_argument);
}

TEST(EditDistance, MatchesEditScriptSearch) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_string(rng, 6);
    const auto b = random_string(rng, 6);
    ASSERT_EQ(edit_distance(a, b), oracle::edit_script_search(a, b, "+-0")) << a << " / " << b;
  }
}

TEST(EditDistance, WeightedMatchesEditScriptSearch) {
  Rng rng(22);
  const CostModel costs{0.7, 1.3, 1.6};
  for (int trial = 0; trial < 60; ++trial) {
    const auto a = random_string(rng, 5);
    const auto b = random_string(rng, 5);
    ASSERT_NEAR(edit_distance(a, b, costs), oracle::edit_script_search(a, b, "+-0", costs), 1e-12) << a << " / " << b;
  }
}

TEST(EditDistance, MetricAxioms) {
  Rng rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = random_string(rng, 8, "*+-0");
    const auto y = random_string(rng, 8, "*+-0");
    const auto z = random_string(rng, 8, "*+-0");
    const double xy = edit_distance(x, y), yx = edit_distance(y, x);
    ASSERT_GE(xy, 0.0);
    ASSERT_EQ(xy, yx);
    ASSERT_EQ(xy == 0.0, x == y);
    ASSERT_LE(edit_distance(x, z), xy + edit_distance(y, z));
  }
}

TEST(SubstringDistance, Examples) {
  EXPECT_EQ(substring_distance("+-", "00+-00"), 0.0);
  EXPECT_EQ(substring_distance("+-", "000"), 2.0);
  EXPECT_EQ(substring_distance("", "+++"), 0.0);
  EXPECT_EQ(substring_distance("+-0", ""), 3.0);
}

TEST(SubstringDistance, MatchesSubstringEnumeration) {
  Rng rng(24);
  for (int trial = 0; trial < 300; ++trial) {
    Tokens q = random_tokens(rng, Notation::PitQ, rng.below(7));
    Tokens t = random_tokens(rng, Notation::PitQ, rng.below(10));
    ASSERT_EQ(substring_distance<Symbol>(q, t), oracle::substring_distance(q, t));
    ASSERT_LE(substring_distance<Symbol>(q, t), edit_distance<Symbol>(q, t));
  }
}

TEST(SubstringDistance, WeightedMatchesEnumeration) {
  Rng rng(25);
  const CostModel costs{1.5, 0.5, 1.2};
  for (int trial = 0; trial < 200; ++trial) {
    Tokens q = random_tokens(rng, Notation::Bth, rng.below(6));
    Tokens t = random_tokens(rng, Notation::Bth, rng.below(9));
    ASSERT_NEAR(substring_distance<Symbol>(q, t, costs), oracle::substring_distance(q, t, costs), 1e-12);
  }
}
