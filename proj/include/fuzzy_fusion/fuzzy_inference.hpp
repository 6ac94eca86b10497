#pragma once

#include <array>

namespace fuzzy_fusion {

/// Linguistic term of a two-set partition.
enum class Term { Small, Large };

/// Complementary Small/Large partition over a bounded universe.
///
/// Inputs are clamped into [universe_min, universe_max] and mapped linearly to
/// u in [0, 1]; Large has degree u and Small has degree 1 - u, so the two
/// degrees always sum to one.
class LinguisticPair {
 public:
  /// Throws std::invalid_argument unless universe_max > universe_min.
  LinguisticPair(double universe_min, double universe_max);

  double universe_min() const { return min_; }
  double universe_max() const { return max_; }

  /// Clamped normalized position of x in the universe.
  double normalized(double x) const;
  double membership(double x, Term term) const;

 private:
  double min_;
  double max_;
};

/// Degrees of one crisp input in both terms of a partition.
struct TermDegrees {
  double small = 1.0;
  double large = 0.0;

  double of(Term term) const { return term == Term::Small ? small : large; }
  static TermDegrees from_normalized(double u) { return {1.0 - u, u}; }
};

/// Antecedent of a rule: (|S1 - S2| term, |dS2/dt| term).
struct RuleKey {
  Term diff;
  Term slope;
};

inline constexpr std::array<RuleKey, 4> kAllRuleKeys = {{
    {Term::Small, Term::Small},
    {Term::Small, Term::Large},
    {Term::Large, Term::Small},
    {Term::Large, Term::Large},
}};

/// Singleton consequents of the W1 output, named by linguistic value.
struct WeightConsequents {
  double very_small = 0.05;  // (Large diff, Small slope)
  double small = 0.25;       // (Small, Small)
  double large = 0.75;       // (Small, Large)
  double very_large = 0.95;  // (Large, Large)
};

/// Singleton consequents of the Drift output. Drift is large only for
/// (Small diff, Large slope).
struct DriftConsequents {
  double small = 0.0;
  double large = 1.0;
};

/// The four-rule table for W1 and Drift.
class RuleBase {
 public:
  RuleBase() = default;
  /// Throws std::invalid_argument if a value leaves [0, 1] or the W1 ordering
  /// very_small < small < large < very_large (or drift small < large) breaks.
  RuleBase(WeightConsequents w1, DriftConsequents drift);

  double w1(RuleKey key) const;
  double drift(RuleKey key) const;

  const WeightConsequents& w1_consequents() const { return w1_; }
  const DriftConsequents& drift_consequents() const { return drift_; }

 private:
  WeightConsequents w1_;
  DriftConsequents drift_;
};

/// Product t-norm of the two antecedent degrees.
double rule_activation(RuleKey key, const TermDegrees& diff, const TermDegrees& slope);

struct Inference {
  double w1_norm;
  double drift_norm;
};

/// Center-average defuzzification over the four rules. u and v are the
/// normalized inputs; values outside [0, 1] are clamped.
Inference infer(const RuleBase& rules, double u, double v);

}  // namespace fuzzy_fusion
