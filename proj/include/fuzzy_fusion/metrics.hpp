#pragma once

#include <span>

#include "fuzzy_fusion/plant.hpp"

namespace fuzzy_fusion {

struct MetricsReport {
  double iae = 0.0;
  double itae = 0.0;
  double peak_to_peak_tail = 0.0;
  double horizon = 0.0;  ///< T, seconds
};

// Samples are taken at t_k = k * dt starting from t = 0; integrals use the
// trapezoidal rule. Empty input throws std::invalid_argument.

double iae(std::span<const double> errors, double dt);
double itae(std::span<const double> errors, double dt);

/// max - min over samples with t_k >= tail_start.
double peak_to_peak_tail(std::span<const double> signal, double dt, double tail_start);

/// Metrics of the true angle (setpoint zero) of a trajectory.
MetricsReport evaluate(const Trajectory& trajectory, double tail_start);

}  // namespace fuzzy_fusion
