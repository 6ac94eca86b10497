// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fuzzy_fusion/experiment.hpp"

using namespace fuzzy_fusion;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail += (detail.empty() ? "" : "; ") + std::string(ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// --- 1. gradient fidelity -------------------------------------------------

double ref_error(const PredictorParams& p, const std::vector<double>& x, double y) {
  const std::size_t d = x.size();
  double a = 0.0, b = 0.0;
  for (std::size_t l = 0; l < p.heights.size(); ++l) {
    double q = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double r = (x[i] - p.centers[l * d + i]) / p.widths[l * d + i];
      q += r * r;
    }
    a += p.heights[l] * std::exp(-q);
    b += std::exp(-q);
  }
  const double f = a / b;
  return 0.5 * (f - y) * (f - y);
}

Outcome gradient_fidelity() {
  Outcome out;
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), width(0.5, 2.5);
  std::size_t partials = 0, bad = 0;
  double worst = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const std::size_t rules = 1 + t % 6, inputs = 1 + (t / 6) % 5;
    PredictorParams p;
    p.settings.window = inputs + 1;
    p.settings.rules = rules;
    for (std::size_t k = 0; k < rules * inputs; ++k) {
      p.centers.push_back(unit(rng));
      p.widths.push_back(width(rng));
    }
    for (std::size_t l = 0; l < rules; ++l) p.heights.push_back(2.0 * unit(rng));
    std::vector<double> x(inputs);
    for (auto& v : x) v = unit(rng);
    const double y = 2.0 * unit(rng);

    const auto g = gradient(p, x, y);
    auto check = [&](std::vector<double> PredictorParams::*field, const std::vector<double>& analytic) {
      for (std::size_t k = 0; k < analytic.size(); ++k) {
        auto q = p;
        double& v = (q.*field)[k];
        const double h = 1e-6 * std::max(1.0, std::abs(v));
        const double orig = v;
        v = orig + h;
        const double up = ref_error(q, x, y);
        v = orig - h;
        const double down = ref_error(q, x, y);
        const double numeric = (up - down) / (2.0 * h);
        const double scale = std::max(std::abs(analytic[k]), std::abs(numeric));
        const double diff = std::abs(analytic[k] - numeric);
        if (diff > std::max(1e-4 * scale, 1e-8)) ++bad;
        if (scale > 1e-6) worst = std::max(worst, diff / scale);
        ++partials;
      }
    };
    check(&PredictorParams::heights, g.d_heights);
    check(&PredictorParams::centers, g.d_centers);
    check(&PredictorParams::widths, g.d_widths);
  }
  out.require(bad == 0, std::to_string(trials) + " triples, " + std::to_string(partials) +
                            " partials, " + std::to_string(bad) + " outside tolerance" +
                            fmt(", worst rel err %.2e where |d| > 1e-6", worst));
  return out;
}

// --- 2. inference closed form ---------------------------------------------

Outcome inference_closed_form() {
  Outcome out;
  const RuleBase rules;
  const auto& c = rules.w1_consequents();
  double worst_w = 0.0, worst_d = 0.0;
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      const double u = i / 100.0, v = j / 100.0;
      const auto r = infer(rules, u, v);
      const double w1 = (1 - u) * (1 - v) * c.small + (1 - u) * v * c.large +
                        u * (1 - v) * c.very_small + u * v * c.very_large;
      worst_w = std::max(worst_w, std::abs(r.w1_norm - w1));
      worst_d = std::max(worst_d, std::abs(r.drift_norm - (1 - u) * v));
    }
  }
  out.require(worst_w <= 1e-12, fmt("max |w1 - bilinear| %.1e", worst_w));
  out.require(worst_d <= 1e-12, fmt("max |drift - (1-u)v| %.1e", worst_d));
  return out;
}

// --- 3. benchmark orderings -----------------------------------------------

double tail_p2p(const RunResult& r) { return r.metrics.peak_to_peak_tail; }

Outcome benchmark_orderings() {
  Outcome out;
  const ExperimentConfig cfg;
  const auto ideal = execute(cfg, FeedbackMode::Ideal);
  const auto fused = execute(cfg, FeedbackMode::Fused);
  const auto average = execute(cfg, FeedbackMode::Average);
  const auto slow = execute(cfg, FeedbackMode::S2Only);
  auto ablated_cfg = cfg;
  ablated_cfg.aggregator.drift_gain = 0.0;
  const auto ablated = execute(ablated_cfg, FeedbackMode::Fused);

  for (const auto* r : {&ideal, &fused, &average, &slow, &ablated}) {
    out.require(!r->fell, std::string(to_string(r->mode)) + " stays up");
  }
  if (!out.pass) return out;

  out.require(ideal.metrics.iae < fused.metrics.iae && fused.metrics.iae < average.metrics.iae,
              fmt("IAE ideal %.4f < fused %.4f < average %.4f", ideal.metrics.iae,
                  fused.metrics.iae, average.metrics.iae));
  out.require(fused.metrics.iae < slow.metrics.iae, fmt("IAE fused < s2_only %.4f", slow.metrics.iae));
  out.require(tail_p2p(slow) > 5.0 * tail_p2p(ideal),
              fmt("p2p(t>=15) s2_only %.4f > 5 x ideal %.4f", tail_p2p(slow), tail_p2p(ideal)));
  out.require(ablated.metrics.iae >= fused.metrics.iae,
              fmt("IAE drift_gain=0 %.4f >= default %.4f", ablated.metrics.iae, fused.metrics.iae));
  return out;
}

// --- 4. robustness sweeps -------------------------------------------------

Outcome robustness_sweeps() {
  Outcome out;
  const ExperimentConfig cfg;
  const std::vector modes{FeedbackMode::S2Only, FeedbackMode::Average, FeedbackMode::Fused};
  const unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::size_t points = 0;
  std::vector<std::string> fell_notes;
  double worst_iae = 0.0, worst_itae = 0.0;
  for (const char* path : {"sensors.time_constant", "sensors.noise_variance", "sensors.bias"}) {
    const auto axis = parse_axis(path);
    const auto rows = sweep(cfg, axis, modes, jobs);
    for (std::size_t k = 0; k < rows.size(); k += modes.size()) {
      const auto& s2 = rows[k];
      const auto& avg = rows[k + 1];
      const auto& fu = rows[k + 2];
      ++points;
      const std::string where = std::string(path) + "=" + fmt("%g", fu.axis_value);
      if (fu.fell || !std::isfinite(fu.metrics.iae)) {
        out.require(false, "fused fell at " + where);
        continue;
      }
      // A fallen comparator has unbounded error; the finite fused run beats it.
      double best_iae = INFINITY, best_itae = INFINITY;
      for (const auto* r : {&s2, &avg}) {
        if (r->fell) {
          fell_notes.push_back(std::string(to_string(r->mode)) + " fell at " + where);
          continue;
        }
        best_iae = std::min(best_iae, r->metrics.iae);
        best_itae = std::min(best_itae, r->metrics.itae);
      }
      if (!(fu.metrics.iae < best_iae)) out.require(false, "IAE not lowest at " + where);
      if (!(fu.metrics.itae < best_itae)) out.require(false, "ITAE not lowest at " + where);
      if (std::isfinite(best_iae)) worst_iae = std::max(worst_iae, fu.metrics.iae / best_iae);
      if (std::isfinite(best_itae)) worst_itae = std::max(worst_itae, fu.metrics.itae / best_itae);
    }
  }
  out.require(true, std::to_string(points) + " grid points" +
                        fmt(", worst fused/best-comparator IAE %.3f ITAE %.3f", worst_iae, worst_itae));
  for (const auto& n : fell_notes) out.require(true, n + " (counted as unbounded error)");
  return out;
}

// --- 5. predictor value ---------------------------------------------------

Outcome predictor_value() {
  Outcome out;
  const ExperimentConfig cfg;
  const auto fused = execute(cfg, FeedbackMode::Fused);
  const auto with_pred = execute(cfg, FeedbackMode::FusedPredictor);
  out.require(!fused.fell && !with_pred.fell, "fused and fused_predictor stay up");
  if (!out.pass) return out;

  // Replay the fused run's aggregator output through a fresh predictor.
  OnlinePredictor predictor(cfg.predictor, cfg.seed);
  const double t_dist = cfg.plant.disturbance_time;
  double se_pred = 0.0, se_hold = 0.0;
  std::size_t n = 0;
  std::optional<double> prev;
  for (const auto& r : fused.trajectory.records) {
    const double y = r.aggregator_output;
    const bool excluded = r.time >= t_dist - 1e-9 && r.time < t_dist + 1.0 - 1e-9;
    if (predictor.prediction() && prev && !excluded) {
      se_pred += std::pow(*predictor.prediction() - y, 2);
      se_hold += std::pow(*prev - y, 2);
      ++n;
    }
    predictor.observe(y);
    prev = y;
  }
  const double rmse_pred = std::sqrt(se_pred / n), rmse_hold = std::sqrt(se_hold / n);
  out.require(rmse_pred < rmse_hold,
              fmt("one-step RMSE predictor %.5f < persistence %.5f", rmse_pred, rmse_hold));
  const double ratio = with_pred.metrics.iae / fused.metrics.iae;
  out.require(ratio <= 1.05, fmt("IAE fused_predictor %.4f / fused %.4f = %.4f <= 1.05",
                                 with_pred.metrics.iae, fused.metrics.iae, ratio));
  out.require(true, ratio < 1.0 ? "strict improvement reached" : "strict improvement NOT reached");
  return out;
}

// --- 6. sensor and metric oracles -----------------------------------------

Outcome sensor_metric_oracles() {
  Outcome out;
  SlowSensorState step{0.5, 0.0};
  const double y = step_lowpass(step, 1.0, 0.5);
  out.require(std::abs(y - (1.0 - std::exp(-1.0))) <= 1e-10, fmt("step response %.12f", y));

  SlowSensorState dc{0.5, 0.0};
  for (int k = 0; k < 500; ++k) step_lowpass(dc, 2.0, 0.01);
  out.require(std::abs(dc.output - 2.0) < 2e-4 * 2.0,
              fmt("DC error after 10 tau %.2e", std::abs(dc.output - 2.0)));

  const std::vector<double> unit(201, 1.0);
  const double a = iae(unit, 0.01), b = itae(unit, 0.01);
  out.require(std::abs(a - 2.0) <= 1e-6 && std::abs(b - 2.0) <= 1e-6,
              fmt("IAE %.9f ITAE %.9f for e=1 on [0,2]", a, b));

  std::mt19937_64 rng(4242);
  const WidebandSensorSpec spec{0.01, 0.0, 0};
  double sum = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) sum += sample_wideband(spec, 0.0, rng);
  const double bound = 3.0 * 0.1 / std::sqrt(static_cast<double>(n));
  out.require(std::abs(sum / n) < bound, fmt("sample mean %.2e within %.2e", sum / n, bound));
  return out;
}

// --- 7. determinism -------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome out;
  const auto root = fs::temp_directory_path() / "fuzzy_fusion_acceptance";
  fs::remove_all(root);
  ExperimentConfig cfg;
  cfg.seed = 2718;
  std::size_t files = 0;
  for (const auto mode : {FeedbackMode::S1Only, FeedbackMode::Fused, FeedbackMode::FusedPredictor}) {
    const auto name = std::string(to_string(mode));
    run_experiment(cfg, mode, root / ("a_" + name));
    run_experiment(cfg, mode, root / ("b_" + name));
    for (const char* f : {"trajectory.csv", "summary.csv", "config.txt"}) {
      const bool same = slurp(root / ("a_" + name) / f) == slurp(root / ("b_" + name) / f);
      if (!same) out.require(false, name + "/" + f + " differs");
      ++files;
    }
  }
  const auto axis = parse_axis("sensors.time_constant=0.3,0.9");
  const std::vector modes{FeedbackMode::Average, FeedbackMode::Fused, FeedbackMode::FusedPredictor};
  run_sweep(cfg, axis, modes, root / "sweep_a", 1);
  run_sweep(cfg, axis, modes, root / "sweep_b", 4);
  if (slurp(root / "sweep_a" / "sweep.csv") != slurp(root / "sweep_b" / "sweep.csv")) {
    out.require(false, "sweep.csv differs between 1 and 4 workers");
  }
  files += 1;
  out.require(true, std::to_string(files) + " artifact pairs compared byte for byte");
  fs::remove_all(root);
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "gradient fidelity", 5.0, gradient_fidelity},
      {2, "inference closed form", 1.0, inference_closed_form},
      {3, "benchmark orderings", 30.0, benchmark_orderings},
      {4, "robustness sweeps", 180.0, robustness_sweeps},
      {5, "predictor value", 60.0, predictor_value},
      {6, "sensor and metric oracles", 5.0, sensor_metric_oracles},
      {7, "determinism", 60.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < c.budget_s, fmt("%.2f s (budget %.0f s)", secs, c.budget_s));
    failures += o.pass ? 0 : 1;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures;
}
