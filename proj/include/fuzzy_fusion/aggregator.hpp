#pragma once

#include <optional>

#include "fuzzy_fusion/fuzzy_inference.hpp"

namespace fuzzy_fusion {

/// Settings of the rule-based fuzzy aggregator. Ranges are in signal units
/// (signal units per second for slope_range).
struct AggregatorConfig {
  double diff_range = 0.17;       ///< span normalizing |S1 - S2|
  double slope_range = 1.8;       ///< span normalizing |dS2/dt|
  double drift_gain = 0.3;        ///< signal units per unit drift_norm
  double gate_tolerance = 0.02;   ///< max accepted |prediction - aggregator output|
  double sample_period = 0.01;    ///< must equal the simulation step
  RuleBase rules;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

/// Memory between steps: the previous S2 sample, unset before the first.
struct AggregatorState {
  std::optional<double> prev_s2;
};

struct Preprocessed {
  double u;        ///< normalized |S1 - S2|
  double v;        ///< normalized |dS2/dt|
  int slope_sign;  ///< sign of dS2/dt, 0 when flat
};

struct FusionStepRecord {
  double u = 0.0;
  double v = 0.0;
  int slope_sign = 0;
  double w1 = 0.0;
  double drift = 0.0;           ///< unsigned drift magnitude in signal units
  double fused_pre_gate = 0.0;  ///< weighted average with signed drift applied
  double estimate = 0.0;
  bool prediction_used = false;
};

struct GateResult {
  double estimate;
  bool prediction_used;
};

struct AggregatorStep {
  FusionStepRecord record;
  AggregatorState state;
};

Preprocessed preprocess(double s1, double s2, const AggregatorState& state,
                        const AggregatorConfig& cfg);

/// Weighted average with normalized weights (w2 = 1 - w1).
double fuse(double s1, double s2, double w1);

double apply_drift(double fused, double drift_norm, int slope_sign, const AggregatorConfig& cfg);

/// Ignores a prediction that disagrees with the aggregator output by more than
/// the tolerance; otherwise averages the two.
GateResult gate_prediction(double agg_out, std::optional<double> prediction,
                           const AggregatorConfig& cfg);

/// Full aggregator pass: preprocess, infer, fuse, drift, gate. Pure in its
/// arguments; the returned state carries prev_s2 = s2.
AggregatorStep step(const AggregatorState& state, double s1, double s2,
                    std::optional<double> prediction, const AggregatorConfig& cfg);

}  // namespace fuzzy_fusion
