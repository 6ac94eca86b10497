#include "fuzzy_fusion/aggregator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fuzzy_fusion {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("aggregator ") + name + " must be positive");
  }
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

void AggregatorConfig::validate() const {
  require_positive(diff_range, "diff_range");
  require_positive(slope_range, "slope_range");
  require_positive(gate_tolerance, "gate_tolerance");
  require_positive(sample_period, "sample_period");
  if (!(drift_gain >= 0.0) || !std::isfinite(drift_gain)) {
    throw std::invalid_argument("aggregator drift_gain must be non-negative");
  }
}

Preprocessed preprocess(double s1, double s2, const AggregatorState& state,
                        const AggregatorConfig& cfg) {
  const double slope = state.prev_s2 ? (s2 - *state.prev_s2) / cfg.sample_period : 0.0;
  return {
      std::clamp(std::abs(s1 - s2) / cfg.diff_range, 0.0, 1.0),
      std::clamp(std::abs(slope) / cfg.slope_range, 0.0, 1.0),
      sign_of(slope),
  };
}

double fuse(double s1, double s2, double w1) { return w1 * s1 + (1.0 - w1) * s2; }

double apply_drift(double fused, double drift_norm, int slope_sign, const AggregatorConfig& cfg) {
  return fused + slope_sign * cfg.drift_gain * drift_norm;
}

GateResult gate_prediction(double agg_out, std::optional<double> prediction,
                           const AggregatorConfig& cfg) {
  if (!prediction || !(std::abs(*prediction - agg_out) <= cfg.gate_tolerance)) {
    return {agg_out, false};
  }
  return {0.5 * (agg_out + *prediction), true};
}

AggregatorStep step(const AggregatorState& state, double s1, double s2,
                    std::optional<double> prediction, const AggregatorConfig& cfg) {
  const auto pre = preprocess(s1, s2, state, cfg);
  const auto inference = infer(cfg.rules, pre.u, pre.v);

  FusionStepRecord rec;
  rec.u = pre.u;
  rec.v = pre.v;
  rec.slope_sign = pre.slope_sign;
  rec.w1 = inference.w1_norm;
  rec.drift = cfg.drift_gain * inference.drift_norm;
  rec.fused_pre_gate =
      apply_drift(fuse(s1, s2, inference.w1_norm), inference.drift_norm, pre.slope_sign, cfg);

  const auto gated = gate_prediction(rec.fused_pre_gate, prediction, cfg);
  rec.estimate = gated.estimate;
  rec.prediction_used = gated.prediction_used;

  return {rec, AggregatorState{s2}};
}

}  // namespace fuzzy_fusion
