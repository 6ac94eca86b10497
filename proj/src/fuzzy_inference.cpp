#include "fuzzy_fusion/fuzzy_inference.hpp"

#include <algorithm>
#include <stdexcept>

namespace fuzzy_fusion {

LinguisticPair::LinguisticPair(double universe_min, double universe_max)
    : min_(universe_min), max_(universe_max) {
  if (!(universe_max > universe_min)) {
    throw std::invalid_argument("linguistic universe requires max > min");
  }
}

double LinguisticPair::normalized(double x) const {
  return std::clamp((x - min_) / (max_ - min_), 0.0, 1.0);
}

double LinguisticPair::membership(double x, Term term) const {
  const double u = normalized(x);
  return term == Term::Large ? u : 1.0 - u;
}

namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

RuleBase::RuleBase(WeightConsequents w1, DriftConsequents drift) : w1_(w1), drift_(drift) {
  if (!in_unit(w1.very_small) || !in_unit(w1.small) || !in_unit(w1.large) ||
      !in_unit(w1.very_large) || !in_unit(drift.small) || !in_unit(drift.large)) {
    throw std::invalid_argument("rule consequents must lie in [0, 1]");
  }
  if (!(w1.very_small < w1.small && w1.small < w1.large && w1.large < w1.very_large)) {
    throw std::invalid_argument("W1 consequents must satisfy very_small < small < large < very_large");
  }
  if (!(drift.small < drift.large)) {
    throw std::invalid_argument("drift consequents must satisfy small < large");
  }
}

double RuleBase::w1(RuleKey key) const {
  if (key.diff == Term::Small) {
    return key.slope == Term::Small ? w1_.small : w1_.large;
  }
  return key.slope == Term::Small ? w1_.very_small : w1_.very_large;
}

double RuleBase::drift(RuleKey key) const {
  return (key.diff == Term::Small && key.slope == Term::Large) ? drift_.large : drift_.small;
}

double rule_activation(RuleKey key, const TermDegrees& diff, const TermDegrees& slope) {
  return diff.of(key.diff) * slope.of(key.slope);
}

Inference infer(const RuleBase& rules, double u, double v) {
  const auto diff = TermDegrees::from_normalized(std::clamp(u, 0.0, 1.0));
  const auto slope = TermDegrees::from_normalized(std::clamp(v, 0.0, 1.0));

  double total = 0.0;
  double w1 = 0.0;
  double drift = 0.0;
  for (const auto key : kAllRuleKeys) {
    const double a = rule_activation(key, diff, slope);
    total += a;
    w1 += a * rules.w1(key);
    drift += a * rules.drift(key);
  }
  // Complementary partitions make total exactly one up to rounding.
  return {w1 / total, drift / total};
}

}  // namespace fuzzy_fusion
