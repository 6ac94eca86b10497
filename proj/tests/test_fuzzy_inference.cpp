#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "fuzzy_fusion/fuzzy_inference.hpp"

using namespace fuzzy_fusion;

namespace {

double grid(int i) { return static_cast<double>(i) / 100.0; }

// Hand-expanded center average under the complementary partition: the four
// activations sum to one, so W1 is a plain bilinear blend of the corners.
double w1_oracle(const WeightConsequents& c, double u, double v) {
  return (1 - u) * (1 - v) * c.small + (1 - u) * v * c.large + u * (1 - v) * c.very_small +
         u * v * c.very_large;
}

}  // namespace

TEST_CASE("membership on the unit universe") {
  const LinguisticPair pair(0.0, 1.0);
  CHECK(pair.membership(0.0, Term::Small) == 1.0);
  CHECK(pair.membership(0.0, Term::Large) == 0.0);
  CHECK(pair.membership(0.25, Term::Small) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(pair.membership(1.2, Term::Small) == 0.0);
  CHECK(pair.membership(-3.0, Term::Large) == 0.0);
}

TEST_CASE("membership on a shifted universe") {
  const LinguisticPair pair(-2.0, 6.0);
  CHECK(pair.normalized(2.0) == 0.5);
  CHECK(pair.membership(4.0, Term::Large) == 0.75);
  CHECK(pair.membership(100.0, Term::Large) == 1.0);
}

TEST_CASE("universe must be non-empty") {
  CHECK_THROWS_AS(LinguisticPair(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(LinguisticPair(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("small and large degrees are complementary") {
  const LinguisticPair pair(-0.3, 0.7);
  for (int i = -50; i <= 150; ++i) {
    const double x = -0.3 + i * 0.01;
    CHECK(pair.membership(x, Term::Small) + pair.membership(x, Term::Large) == 1.0);
  }
}

TEST_CASE("rule activation examples") {
  const TermDegrees all_small{1.0, 0.0};
  const TermDegrees all_large{0.0, 1.0};
  const TermDegrees half{0.5, 0.5};
  CHECK(rule_activation({Term::Small, Term::Small}, all_small, all_small) == 1.0);
  CHECK(rule_activation({Term::Small, Term::Large}, all_small, all_large) == 1.0);
  CHECK(rule_activation({Term::Large, Term::Large}, half, half) == 0.25);
  CHECK(rule_activation({Term::Large, Term::Small}, all_small, all_small) == 0.0);
}

TEST_CASE("activations sum to one over the grid") {
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      const auto d = TermDegrees::from_normalized(grid(i));
      const auto s = TermDegrees::from_normalized(grid(j));
      double sum = 0.0;
      for (const auto key : kAllRuleKeys) sum += rule_activation(key, d, s);
      REQUIRE(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("infer corner and centre examples") {
  const RuleBase rules;
  auto r = infer(rules, 0.0, 0.0);
  CHECK(r.w1_norm == doctest::Approx(0.25));
  CHECK(r.drift_norm == 0.0);
  r = infer(rules, 0.0, 1.0);
  CHECK(r.w1_norm == doctest::Approx(0.75));
  CHECK(r.drift_norm == doctest::Approx(1.0));
  r = infer(rules, 1.0, 1.0);
  CHECK(r.w1_norm == doctest::Approx(0.95));
  CHECK(r.drift_norm == 0.0);
  r = infer(rules, 0.5, 0.5);
  CHECK(r.w1_norm == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.drift_norm == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("infer clamps its inputs") {
  const RuleBase rules;
  const auto a = infer(rules, -0.4, 1.7);
  const auto b = infer(rules, 0.0, 1.0);
  CHECK(a.w1_norm == b.w1_norm);
  CHECK(a.drift_norm == b.drift_norm);
}

TEST_CASE("infer matches the bilinear closed forms") {
  const RuleBase rules;
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      const double u = grid(i), v = grid(j);
      const auto r = infer(rules, u, v);
      REQUIRE(std::abs(r.w1_norm - w1_oracle(rules.w1_consequents(), u, v)) < 1e-12);
      REQUIRE(std::abs(r.drift_norm - (1 - u) * v) < 1e-12);
    }
  }
}

TEST_CASE("infer stays within the consequent range") {
  const RuleBase rules({0.1, 0.3, 0.6, 0.9}, {0.2, 0.7});
  for (int i = 0; i <= 100; i += 5) {
    for (int j = 0; j <= 100; j += 5) {
      const auto r = infer(rules, grid(i), grid(j));
      CHECK(r.w1_norm >= 0.1 - 1e-15);
      CHECK(r.w1_norm <= 0.9 + 1e-15);
      CHECK(r.drift_norm >= 0.2 - 1e-15);
      CHECK(r.drift_norm <= 0.7 + 1e-15);
      CHECK(std::abs(r.w1_norm - w1_oracle(rules.w1_consequents(), grid(i), grid(j))) < 1e-12);
    }
  }
}

TEST_CASE("w1 monotonicity follows the rule ordering") {
  const RuleBase rules;
  for (int i = 0; i <= 100; ++i) {
    for (int j = 1; j <= 100; ++j) {
      REQUIRE(infer(rules, grid(i), grid(j)).w1_norm > infer(rules, grid(i), grid(j - 1)).w1_norm);
    }
  }
  for (int i = 1; i <= 100; ++i) {
    REQUIRE(infer(rules, grid(i), 0.0).w1_norm < infer(rules, grid(i - 1), 0.0).w1_norm);
    REQUIRE(infer(rules, grid(i), 1.0).w1_norm > infer(rules, grid(i - 1), 1.0).w1_norm);
  }
}

TEST_CASE("rule base lookups and validation") {
  const RuleBase rules;
  CHECK(rules.w1({Term::Large, Term::Small}) == 0.05);
  CHECK(rules.w1({Term::Small, Term::Small}) == 0.25);
  CHECK(rules.w1({Term::Small, Term::Large}) == 0.75);
  CHECK(rules.w1({Term::Large, Term::Large}) == 0.95);
  for (const auto key : kAllRuleKeys) {
    const bool peak = key.diff == Term::Small && key.slope == Term::Large;
    CHECK(rules.drift(key) == (peak ? 1.0 : 0.0));
  }
  CHECK_THROWS_AS(RuleBase({0.3, 0.25, 0.75, 0.95}, {}), std::invalid_argument);
  CHECK_THROWS_AS(RuleBase({0.05, 0.25, 0.75, 1.2}, {}), std::invalid_argument);
  CHECK_THROWS_AS(RuleBase({}, {0.5, 0.5}), std::invalid_argument);
}
