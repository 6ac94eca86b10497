#pragma once

#include <cstdint>
#include <random>

namespace fuzzy_fusion {

/// Error model of the wideband sensor S1: instantaneous, with additive bias
/// and white Gaussian noise.
struct WidebandSensorSpec {
  double noise_variance = 0.01;
  double bias = -0.02;
  std::uint64_t seed = 0;
};

/// Draws one S1 reading. A zero variance consumes no random numbers.
double sample_wideband(const WidebandSensorSpec& spec, double truth, std::mt19937_64& rng);

/// S1 with its own random stream.
class WidebandSensor {
 public:
  explicit WidebandSensor(const WidebandSensorSpec& spec);
  double sample(double truth) { return sample_wideband(spec_, truth, rng_); }

 private:
  WidebandSensorSpec spec_;
  std::mt19937_64 rng_;
};

/// The slow sensor S2: a first-order lag.
struct SlowSensorState {
  double time_constant = 0.5;
  double output = 0.0;
};

/// Advances the lag by dt with the zero-order-hold exact update and returns
/// the new output.
double step_lowpass(SlowSensorState& state, double truth, double dt);

}  // namespace fuzzy_fusion
