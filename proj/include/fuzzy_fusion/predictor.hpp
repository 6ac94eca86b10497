#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fuzzy_fusion {

/// Hyperparameters of the Gaussian fuzzy predictor.
struct PredictorSettings {
  std::size_t window = 20;        ///< n: n-1 inputs predict the n-th sample
  std::size_t rules = 10;         ///< M
  double alpha = 1.0;             ///< gradient step length
  double error_threshold = 1e-6;  ///< training stops once e drops below this
  std::size_t max_iters = 50;     ///< per-sample cap on parameter updates
  double sigma_floor = 1e-3;
  double init_jitter = 0.01;      ///< center jitter as a fraction of window span
  double init_width_scale = 8.0;  ///< initial sigma = scale * window std

  void validate() const;
  std::size_t inputs() const { return window - 1; }
};

/// Trainable parameters of
///   f(x) = sum_l h_l z_l / sum_l z_l,  z_l = prod_i exp(-((x_i - c_li) / s_li)^2).
/// Centers and widths are stored row-major, one row of `inputs()` per rule.
struct PredictorParams {
  PredictorSettings settings;
  std::vector<double> centers;
  std::vector<double> widths;
  std::vector<double> heights;

  std::size_t rules() const { return heights.size(); }
  std::size_t inputs() const { return settings.inputs(); }
  double& center(std::size_t l, std::size_t i) { return centers[l * inputs() + i]; }
  double center(std::size_t l, std::size_t i) const { return centers[l * inputs() + i]; }
  double& width(std::size_t l, std::size_t i) { return widths[l * inputs() + i]; }
  double width(std::size_t l, std::size_t i) const { return widths[l * inputs() + i]; }

  /// Seeds every rule from one full window: centers are jittered copies of the
  /// inputs, heights equal the target, widths follow the window spread.
  static PredictorParams seeded(const PredictorSettings& settings, std::span<const double> window,
                                std::uint64_t seed);

  /// Checks dimensions and the sigma floor.
  void validate() const;
};

/// Every rule's firing strength underflowed to zero.
class DegenerateEvaluation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double eval(const PredictorParams& params, std::span<const double> x);

/// Squared-error gradient at (x, target), with the intermediates it was built
/// from. Partials share the layout of the parameter vectors.
struct PredictorGradient {
  double f = 0.0;
  double error = 0.0;  ///< 0.5 * (f - target)^2
  std::vector<double> d_heights;
  std::vector<double> d_centers;
  std::vector<double> d_widths;
};

PredictorGradient gradient(const PredictorParams& params, std::span<const double> x, double target);

/// One simultaneous descent update of all parameters. Returns the error before
/// the update. Widths are clamped to the floor afterwards.
double grad_step(PredictorParams& params, std::span<const double> x, double target);

/// Trains on (x_1..x_{n-1}) -> x_n until the error is below threshold or
/// max_iters updates were made. Returns the number of updates applied.
std::size_t train_on_window(PredictorParams& params, std::span<const double> window);

/// Evaluates on the last n-1 samples of the window (one step ahead).
double predict_next(const PredictorParams& params, std::span<const double> window);

/// Online driver: keeps the last n samples, trains on every new one, and
/// exposes the prediction for the sample that comes next.
class OnlinePredictor {
 public:
  OnlinePredictor(PredictorSettings settings, std::uint64_t seed);

  /// Prediction of the next observed value, if one is available.
  std::optional<double> prediction() const { return prediction_; }

  void observe(double value);

  std::size_t reseeds() const { return reseeds_; }
  const std::optional<PredictorParams>& params() const { return params_; }

 private:
  PredictorSettings settings_;
  std::uint64_t seed_;
  std::deque<double> history_;
  std::optional<PredictorParams> params_;
  std::optional<double> prediction_;
  std::size_t reseeds_ = 0;
};

}  // namespace fuzzy_fusion
