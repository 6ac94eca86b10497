#include "fuzzy_fusion/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fuzzy_fusion {

namespace {

void check(std::span<const double> values, double dt) {
  if (values.empty()) throw std::invalid_argument("metric over an empty sequence");
  if (!(dt > 0.0)) throw std::invalid_argument("metric requires dt > 0");
}

template <typename Weight>
double trapezoid(std::span<const double> errors, double dt, Weight weight) {
  double sum = 0.0;
  for (std::size_t k = 1; k < errors.size(); ++k) {
    sum += weight(k - 1) * std::abs(errors[k - 1]) + weight(k) * std::abs(errors[k]);
  }
  return 0.5 * dt * sum;
}

}  // namespace

double iae(std::span<const double> errors, double dt) {
  check(errors, dt);
  return trapezoid(errors, dt, [](std::size_t) { return 1.0; });
}

double itae(std::span<const double> errors, double dt) {
  check(errors, dt);
  return trapezoid(errors, dt, [dt](std::size_t k) { return static_cast<double>(k) * dt; });
}

double peak_to_peak_tail(std::span<const double> signal, double dt, double tail_start) {
  check(signal, dt);
  // First index whose time reaches tail_start, tolerating k * dt rounding.
  const double first = std::ceil(tail_start / dt - 1e-9);
  const auto begin = static_cast<std::size_t>(std::max(first, 0.0));
  if (begin >= signal.size()) {
    throw std::invalid_argument("peak_to_peak_tail window is empty");
  }
  const auto tail = signal.subspan(begin);
  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  return *hi - *lo;
}

MetricsReport evaluate(const Trajectory& trajectory, double tail_start) {
  const auto truth = trajectory.truth();
  MetricsReport report;
  report.iae = iae(truth, trajectory.dt);
  report.itae = itae(truth, trajectory.dt);
  report.peak_to_peak_tail = peak_to_peak_tail(truth, trajectory.dt, tail_start);
  report.horizon = static_cast<double>(truth.size() - 1) * trajectory.dt;
  return report;
}

}  // namespace fuzzy_fusion
