#include "fuzzy_fusion/sensors.hpp"

#include <cmath>
#include <stdexcept>

namespace fuzzy_fusion {

double sample_wideband(const WidebandSensorSpec& spec, double truth, std::mt19937_64& rng) {
  if (!(spec.noise_variance >= 0.0)) {
    throw std::invalid_argument("sensor noise_variance must be non-negative");
  }
  if (spec.noise_variance == 0.0) return truth + spec.bias;
  std::normal_distribution<double> noise(0.0, std::sqrt(spec.noise_variance));
  return truth + spec.bias + noise(rng);
}

WidebandSensor::WidebandSensor(const WidebandSensorSpec& spec) : spec_(spec), rng_(spec.seed) {
  if (!(spec.noise_variance >= 0.0)) {
    throw std::invalid_argument("sensor noise_variance must be non-negative");
  }
}

double step_lowpass(SlowSensorState& state, double truth, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("low-pass step requires dt > 0");
  if (!(state.time_constant > 0.0)) {
    throw std::invalid_argument("low-pass time_constant must be positive");
  }
  const double gain = -std::expm1(-dt / state.time_constant);
  state.output += gain * (truth - state.output);
  return state.output;
}

}  // namespace fuzzy_fusion
