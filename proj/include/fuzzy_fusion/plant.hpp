#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "fuzzy_fusion/aggregator.hpp"
#include "fuzzy_fusion/predictor.hpp"
#include "fuzzy_fusion/sensors.hpp"

namespace fuzzy_fusion {

/// Cart-pole state; theta = 0 is upright and positive theta leans toward +x.
struct PendulumState {
  double theta = 0.0;
  double theta_dot = 0.0;
  double cart_x = 0.0;
  double cart_v = 0.0;
};

struct StateDerivative {
  double theta_dot;
  double theta_ddot;
  double cart_v;
  double cart_a;
};

/// Plant, controller and run protocol of the inverted-pendulum benchmark.
struct BenchmarkConfig {
  double cart_mass = 0.5;
  double pole_mass = 0.2;
  double pole_half_length = 0.3;
  double gravity = 9.81;
  double cart_friction = 0.1;

  double kp = 10.0;
  double ki = 1.7;
  double kd = 14.8;
  double derivative_filter = 0.0115;  ///< time constant of the D-term low-pass, 0 disables
  double force_limit = 120.0;

  double dt = 0.01;
  double duration = 50.0;
  double initial_theta = 0.1;
  double disturbance_time = 25.0;
  double disturbance_force = 1.0;
  double disturbance_duration = 0.1;

  void validate() const;
};

/// Nonlinear cart-pole equations with viscous cart friction and a uniform rod.
StateDerivative dynamics(const PendulumState& state, double force, const BenchmarkConfig& cfg);

/// One classical Runge-Kutta step with the force held constant.
PendulumState rk4_step(const PendulumState& state, double force, double dt,
                       const BenchmarkConfig& cfg);

/// Saturated PID law. The error is the estimated angle (setpoint zero), so a
/// positive error pushes the cart under the pole.
double control_force(double error, double error_integral, double error_derivative,
                     const BenchmarkConfig& cfg);

/// Discrete PID state: rectangular integral and a first-order filtered
/// backward-difference derivative (zero on the first sample).
class PidController {
 public:
  explicit PidController(const BenchmarkConfig& cfg) : cfg_(cfg) {}
  double update(double error);

 private:
  BenchmarkConfig cfg_;
  double integral_ = 0.0;
  double derivative_ = 0.0;
  double prev_error_ = 0.0;
  bool has_prev_ = false;
};

enum class FeedbackMode { Ideal, S1Only, S2Only, Average, Fused, FusedPredictor };

std::string_view to_string(FeedbackMode mode);
std::optional<FeedbackMode> parse_feedback_mode(std::string_view name);

/// One simulation step. `prediction` is the predictor output that was
/// available to the aggregator at this step.
struct TrajectoryRecord {
  double time = 0.0;
  double truth = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double estimate = 0.0;
  double w1 = 0.0;
  double drift = 0.0;
  double aggregator_output = 0.0;
  std::optional<double> prediction;
  bool prediction_used = false;
  double force = 0.0;  ///< total applied force including any disturbance
  PendulumState plant;
};

struct Trajectory {
  FeedbackMode mode = FeedbackMode::Ideal;
  double dt = 0.0;
  std::vector<TrajectoryRecord> records;

  std::vector<double> truth() const;
};

/// Everything a single closed-loop run needs.
struct SimulationSetup {
  BenchmarkConfig plant;
  WidebandSensorSpec wideband;
  double slow_time_constant = 0.5;
  AggregatorConfig aggregator;
  PredictorSettings predictor;
  std::uint64_t seed = 1;

  void validate() const;
};

/// The pendulum passed |theta| > pi/2; carries the trajectory up to the fall.
class PendulumFell : public std::runtime_error {
 public:
  PendulumFell(double time, Trajectory partial);
  double time() const { return time_; }
  const Trajectory& partial() const { return partial_; }

 private:
  double time_;
  Trajectory partial_;
};

/// Runs the closed loop for the configured duration. Sensors are sampled in
/// every mode so all modes see the same noise realization for a given seed.
/// Throws PendulumFell on a fall.
Trajectory simulate(const SimulationSetup& setup, FeedbackMode mode);

}  // namespace fuzzy_fusion
