#include "fuzzy_fusion/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace fuzzy_fusion {

namespace {

void require_length(std::span<const double> values, std::size_t expected, const char* what) {
  if (values.size() != expected) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(expected) +
                                " samples, got " + std::to_string(values.size()));
  }
}

/// Firing strengths z_l; throws when they all vanish.
std::vector<double> firing(const PredictorParams& p, std::span<const double> x, double& total) {
  std::vector<double> z(p.rules());
  total = 0.0;
  for (std::size_t l = 0; l < p.rules(); ++l) {
    double q = 0.0;
    for (std::size_t i = 0; i < p.inputs(); ++i) {
      const double r = (x[i] - p.center(l, i)) / p.width(l, i);
      q += r * r;
    }
    z[l] = std::exp(-q);
    total += z[l];
  }
  if (!(total > 0.0)) {
    throw DegenerateEvaluation("all predictor rules have zero firing strength");
  }
  return z;
}

}  // namespace

void PredictorSettings::validate() const {
  if (window < 2) throw std::invalid_argument("predictor window must be at least 2");
  if (rules < 1) throw std::invalid_argument("predictor needs at least one rule");
  if (!(alpha > 0.0)) throw std::invalid_argument("predictor alpha must be positive");
  if (!(error_threshold > 0.0)) {
    throw std::invalid_argument("predictor error_threshold must be positive");
  }
  if (max_iters < 1) throw std::invalid_argument("predictor max_iters must be at least 1");
  if (!(sigma_floor > 0.0)) throw std::invalid_argument("predictor sigma_floor must be positive");
  if (!(init_jitter >= 0.0)) throw std::invalid_argument("predictor init_jitter must be >= 0");
  if (!(init_width_scale > 0.0)) {
    throw std::invalid_argument("predictor init_width_scale must be positive");
  }
}

PredictorParams PredictorParams::seeded(const PredictorSettings& settings,
                                        std::span<const double> window, std::uint64_t seed) {
  settings.validate();
  require_length(window, settings.window, "predictor seed window");

  const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
  const double span = *hi - *lo;
  const double mean = std::accumulate(window.begin(), window.end(), 0.0) / window.size();
  double var = 0.0;
  for (double w : window) var += (w - mean) * (w - mean);
  const double stddev = std::sqrt(var / window.size());
  const double sigma = std::max(settings.init_width_scale * stddev, settings.sigma_floor);

  PredictorParams p;
  p.settings = settings;
  const std::size_t d = settings.inputs();
  p.centers.resize(settings.rules * d);
  p.widths.assign(settings.rules * d, sigma);
  p.heights.assign(settings.rules, window.back());

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  const double amplitude = settings.init_jitter * span;
  for (std::size_t l = 0; l < settings.rules; ++l) {
    for (std::size_t i = 0; i < d; ++i) {
      p.center(l, i) = window[i] + amplitude * jitter(rng);
    }
  }
  return p;
}

void PredictorParams::validate() const {
  settings.validate();
  if (heights.size() != settings.rules || centers.size() != settings.rules * inputs() ||
      widths.size() != centers.size()) {
    throw std::invalid_argument("predictor parameter dimensions are inconsistent");
  }
  for (double w : widths) {
    if (!(w >= settings.sigma_floor)) {
      throw std::invalid_argument("predictor width below sigma_floor");
    }
  }
}

double eval(const PredictorParams& params, std::span<const double> x) {
  require_length(x, params.inputs(), "predictor input");
  double b = 0.0;
  const auto z = firing(params, x, b);
  double a = 0.0;
  for (std::size_t l = 0; l < params.rules(); ++l) a += params.heights[l] * z[l];
  return a / b;
}

PredictorGradient gradient(const PredictorParams& params, std::span<const double> x,
                           double target) {
  require_length(x, params.inputs(), "predictor input");
  double b = 0.0;
  const auto z = firing(params, x, b);
  double a = 0.0;
  for (std::size_t l = 0; l < params.rules(); ++l) a += params.heights[l] * z[l];

  PredictorGradient g;
  g.f = a / b;
  g.error = 0.5 * (g.f - target) * (g.f - target);
  g.d_heights.resize(params.rules());
  g.d_centers.resize(params.centers.size());
  g.d_widths.resize(params.widths.size());

  const double scale = (g.f - target) / b;
  for (std::size_t l = 0; l < params.rules(); ++l) {
    g.d_heights[l] = scale * z[l];
    const double common = scale * (params.heights[l] - g.f) * z[l];
    for (std::size_t i = 0; i < params.inputs(); ++i) {
      const double dx = x[i] - params.center(l, i);
      const double s = params.width(l, i);
      const std::size_t k = l * params.inputs() + i;
      g.d_centers[k] = common * 2.0 * dx / (s * s);
      g.d_widths[k] = common * 2.0 * dx * dx / (s * s * s);
    }
  }
  return g;
}

double grad_step(PredictorParams& params, std::span<const double> x, double target) {
  const auto g = gradient(params, x, target);
  const double alpha = params.settings.alpha;
  for (std::size_t l = 0; l < params.heights.size(); ++l) params.heights[l] -= alpha * g.d_heights[l];
  for (std::size_t k = 0; k < params.centers.size(); ++k) params.centers[k] -= alpha * g.d_centers[k];
  for (std::size_t k = 0; k < params.widths.size(); ++k) {
    params.widths[k] = std::max(params.widths[k] - alpha * g.d_widths[k], params.settings.sigma_floor);
  }
  return g.error;
}

std::size_t train_on_window(PredictorParams& params, std::span<const double> window) {
  require_length(window, params.settings.window, "predictor training window");
  const auto x = window.first(params.inputs());
  const double target = window.back();

  std::size_t updates = 0;
  while (updates < params.settings.max_iters) {
    const double e = 0.5 * std::pow(eval(params, x) - target, 2);
    if (e < params.settings.error_threshold) break;
    grad_step(params, x, target);
    ++updates;
  }
  return updates;
}

double predict_next(const PredictorParams& params, std::span<const double> window) {
  require_length(window, params.settings.window, "predictor window");
  return eval(params, window.last(params.inputs()));
}

OnlinePredictor::OnlinePredictor(PredictorSettings settings, std::uint64_t seed)
    : settings_(settings), seed_(seed) {
  settings_.validate();
}

void OnlinePredictor::observe(double value) {
  history_.push_back(value);
  if (history_.size() > settings_.window) history_.pop_front();
  prediction_.reset();
  if (history_.size() < settings_.window) return;

  const std::vector<double> window(history_.begin(), history_.end());
  if (!params_) {
    params_ = PredictorParams::seeded(settings_, window, seed_ + reseeds_);
  }
  try {
    train_on_window(*params_, window);
  } catch (const DegenerateEvaluation&) {
    ++reseeds_;
    params_ = PredictorParams::seeded(settings_, window, seed_ + reseeds_);
    try {
      train_on_window(*params_, window);
    } catch (const DegenerateEvaluation&) {
      params_.reset();  // start over from the next window
      return;
    }
  }
  try {
    prediction_ = predict_next(*params_, window);
  } catch (const DegenerateEvaluation&) {
    prediction_.reset();
  }
}

}  // namespace fuzzy_fusion
