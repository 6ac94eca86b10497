#include "fuzzy_fusion/plant.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace fuzzy_fusion {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

PendulumState advance(const PendulumState& s, const StateDerivative& d, double h) {
  return {s.theta + h * d.theta_dot, s.theta_dot + h * d.theta_ddot, s.cart_x + h * d.cart_v,
          s.cart_v + h * d.cart_a};
}

// Keeps 0.1 s pulses at 10 steps of 0.01 s despite rounding of k * dt.
bool disturbance_active(double t, const BenchmarkConfig& cfg) {
  const double eps = 1e-9 * cfg.dt;
  return t + eps >= cfg.disturbance_time &&
         t + eps < cfg.disturbance_time + cfg.disturbance_duration;
}

constexpr std::uint64_t kPredictorStream = 0x9e3779b97f4a7c15ULL;

}  // namespace

void BenchmarkConfig::validate() const {
  require(cart_mass > 0.0, "plant cart_mass must be positive");
  require(pole_mass > 0.0, "plant pole_mass must be positive");
  require(pole_half_length > 0.0, "plant pole_half_length must be positive");
  require(std::isfinite(gravity), "plant gravity must be finite");
  require(cart_friction >= 0.0, "plant cart_friction must be non-negative");
  require(std::isfinite(kp) && std::isfinite(ki) && std::isfinite(kd), "controller gains must be finite");
  require(derivative_filter >= 0.0, "controller derivative_filter must be non-negative");
  require(force_limit > 0.0, "controller force_limit must be positive");
  require(dt > 0.0 && dt <= 0.02, "run dt must lie in (0, 0.02]");
  require(duration > 0.0, "run duration must be positive");
  require(std::isfinite(initial_theta), "run initial_theta must be finite");
  require(disturbance_time < duration, "disturbance time must precede the end of the run");
  require(disturbance_duration >= 0.0, "disturbance duration must be non-negative");
}

StateDerivative dynamics(const PendulumState& s, double force, const BenchmarkConfig& cfg) {
  const double total_mass = cfg.cart_mass + cfg.pole_mass;
  const double ml = cfg.pole_mass * cfg.pole_half_length;
  const double sin_t = std::sin(s.theta);
  const double cos_t = std::cos(s.theta);

  const double temp =
      (force - cfg.cart_friction * s.cart_v + ml * s.theta_dot * s.theta_dot * sin_t) / total_mass;
  const double theta_ddot =
      (cfg.gravity * sin_t - cos_t * temp) /
      (cfg.pole_half_length * (4.0 / 3.0 - cfg.pole_mass * cos_t * cos_t / total_mass));
  const double cart_a = temp - ml * theta_ddot * cos_t / total_mass;
  return {s.theta_dot, theta_ddot, s.cart_v, cart_a};
}

PendulumState rk4_step(const PendulumState& s, double force, double dt,
                       const BenchmarkConfig& cfg) {
  const auto k1 = dynamics(s, force, cfg);
  const auto k2 = dynamics(advance(s, k1, 0.5 * dt), force, cfg);
  const auto k3 = dynamics(advance(s, k2, 0.5 * dt), force, cfg);
  const auto k4 = dynamics(advance(s, k3, dt), force, cfg);
  const double w = dt / 6.0;
  return {
      s.theta + w * (k1.theta_dot + 2.0 * k2.theta_dot + 2.0 * k3.theta_dot + k4.theta_dot),
      s.theta_dot + w * (k1.theta_ddot + 2.0 * k2.theta_ddot + 2.0 * k3.theta_ddot + k4.theta_ddot),
      s.cart_x + w * (k1.cart_v + 2.0 * k2.cart_v + 2.0 * k3.cart_v + k4.cart_v),
      s.cart_v + w * (k1.cart_a + 2.0 * k2.cart_a + 2.0 * k3.cart_a + k4.cart_a),
  };
}

double control_force(double error, double error_integral, double error_derivative,
                     const BenchmarkConfig& cfg) {
  const double u = cfg.kp * error + cfg.ki * error_integral + cfg.kd * error_derivative;
  return std::clamp(u, -cfg.force_limit, cfg.force_limit);
}

double PidController::update(double error) {
  integral_ += error * cfg_.dt;
  const double raw = has_prev_ ? (error - prev_error_) / cfg_.dt : 0.0;
  prev_error_ = error;
  has_prev_ = true;
  const double blend = cfg_.dt / (cfg_.derivative_filter + cfg_.dt);
  derivative_ += blend * (raw - derivative_);
  return control_force(error, integral_, derivative_, cfg_);
}

namespace {

constexpr std::array<std::pair<FeedbackMode, std::string_view>, 6> kModeNames = {{
    {FeedbackMode::Ideal, "ideal"},
    {FeedbackMode::S1Only, "s1_only"},
    {FeedbackMode::S2Only, "s2_only"},
    {FeedbackMode::Average, "average"},
    {FeedbackMode::Fused, "fused"},
    {FeedbackMode::FusedPredictor, "fused_predictor"},
}};

}  // namespace

std::string_view to_string(FeedbackMode mode) {
  for (const auto& [m, name] : kModeNames) {
    if (m == mode) return name;
  }
  return "unknown";
}

std::optional<FeedbackMode> parse_feedback_mode(std::string_view name) {
  for (const auto& [m, n] : kModeNames) {
    if (n == name) return m;
  }
  return std::nullopt;
}

std::vector<double> Trajectory::truth() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.truth);
  return out;
}

void SimulationSetup::validate() const {
  plant.validate();
  aggregator.validate();
  predictor.validate();
  require(wideband.noise_variance >= 0.0, "sensor noise_variance must be non-negative");
  require(std::isfinite(wideband.bias), "sensor bias must be finite");
  require(slow_time_constant > 0.0, "sensor time_constant must be positive");
  require(std::abs(aggregator.sample_period - plant.dt) <= 1e-12 * plant.dt,
          "aggregator sample_period must equal the simulation dt");
}

PendulumFell::PendulumFell(double time, Trajectory partial)
    : std::runtime_error("pendulum fell at t=" + std::to_string(time) + " s"),
      time_(time),
      partial_(std::move(partial)) {}

Trajectory simulate(const SimulationSetup& setup, FeedbackMode mode) {
  setup.validate();
  const auto& cfg = setup.plant;
  const auto steps = static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt));

  auto wideband_spec = setup.wideband;
  wideband_spec.seed = setup.seed;
  WidebandSensor wideband(wideband_spec);
  SlowSensorState slow{setup.slow_time_constant, cfg.initial_theta};
  AggregatorState agg_state;
  PidController pid(cfg);
  std::optional<OnlinePredictor> predictor;
  if (mode == FeedbackMode::FusedPredictor) {
    predictor.emplace(setup.predictor, setup.seed ^ kPredictorStream);
  }

  Trajectory traj;
  traj.mode = mode;
  traj.dt = cfg.dt;
  traj.records.reserve(steps + 1);

  PendulumState state{cfg.initial_theta, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    if (!(std::abs(state.theta) <= std::numbers::pi / 2.0)) {
      throw PendulumFell(t, std::move(traj));
    }

    TrajectoryRecord rec;
    rec.time = t;
    rec.truth = state.theta;
    rec.plant = state;
    rec.s1 = wideband.sample(state.theta);
    rec.s2 = k == 0 ? slow.output : step_lowpass(slow, state.theta, cfg.dt);

    switch (mode) {
      case FeedbackMode::Ideal:
        rec.estimate = rec.truth;
        rec.w1 = std::nan("");
        break;
      case FeedbackMode::S1Only:
        rec.estimate = rec.s1;
        rec.w1 = 1.0;
        break;
      case FeedbackMode::S2Only:
        rec.estimate = rec.s2;
        rec.w1 = 0.0;
        break;
      case FeedbackMode::Average:
        rec.w1 = 0.5;
        rec.estimate = fuse(rec.s1, rec.s2, rec.w1);
        break;
      case FeedbackMode::Fused:
      case FeedbackMode::FusedPredictor: {
        if (predictor) rec.prediction = predictor->prediction();
        const auto out = step(agg_state, rec.s1, rec.s2, rec.prediction, setup.aggregator);
        agg_state = out.state;
        rec.estimate = out.record.estimate;
        rec.w1 = out.record.w1;
        rec.drift = out.record.drift;
        rec.prediction_used = out.record.prediction_used;
        rec.aggregator_output = out.record.fused_pre_gate;
        if (predictor) predictor->observe(out.record.fused_pre_gate);
        break;
      }
    }
    if (mode != FeedbackMode::Fused && mode != FeedbackMode::FusedPredictor) {
      rec.aggregator_output = rec.estimate;
    }

    double force = pid.update(rec.estimate);
    if (disturbance_active(t, cfg)) force += cfg.disturbance_force;
    rec.force = force;
    traj.records.push_back(rec);

    state = rk4_step(state, force, cfg.dt, cfg);
  }
  return traj;
}

}  // namespace fuzzy_fusion
