#include "fuzzy_fusion/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <variant>

namespace fuzzy_fusion {

ConfigError::ConfigError(std::string key, const std::string& message)
    : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

namespace {

// size_t and uint64_t may be the same type, so the seed gets its own wrapper.
struct SeedSlot {
  std::uint64_t* value;
  std::uint64_t& operator*() const { return *value; }
};
using Slot = std::variant<double*, std::size_t*, SeedSlot>;

struct Parameter {
  std::string_view path;
  std::function<Slot(ExperimentConfig&)> slot;
};

const std::vector<Parameter>& registry() {
  static const std::vector<Parameter> params = {
      {"plant.cart_mass", [](ExperimentConfig& c) -> Slot { return &c.plant.cart_mass; }},
      {"plant.pole_mass", [](ExperimentConfig& c) -> Slot { return &c.plant.pole_mass; }},
      {"plant.pole_half_length", [](ExperimentConfig& c) -> Slot { return &c.plant.pole_half_length; }},
      {"plant.gravity", [](ExperimentConfig& c) -> Slot { return &c.plant.gravity; }},
      {"plant.cart_friction", [](ExperimentConfig& c) -> Slot { return &c.plant.cart_friction; }},
      {"controller.kp", [](ExperimentConfig& c) -> Slot { return &c.plant.kp; }},
      {"controller.ki", [](ExperimentConfig& c) -> Slot { return &c.plant.ki; }},
      {"controller.kd", [](ExperimentConfig& c) -> Slot { return &c.plant.kd; }},
      {"controller.derivative_filter", [](ExperimentConfig& c) -> Slot { return &c.plant.derivative_filter; }},
      {"controller.force_limit", [](ExperimentConfig& c) -> Slot { return &c.plant.force_limit; }},
      {"run.dt", [](ExperimentConfig& c) -> Slot { return &c.plant.dt; }},
      {"run.duration", [](ExperimentConfig& c) -> Slot { return &c.plant.duration; }},
      {"run.initial_theta", [](ExperimentConfig& c) -> Slot { return &c.plant.initial_theta; }},
      {"run.seed", [](ExperimentConfig& c) -> Slot { return SeedSlot{&c.seed}; }},
      {"disturbance.time", [](ExperimentConfig& c) -> Slot { return &c.plant.disturbance_time; }},
      {"disturbance.force", [](ExperimentConfig& c) -> Slot { return &c.plant.disturbance_force; }},
      {"disturbance.duration", [](ExperimentConfig& c) -> Slot { return &c.plant.disturbance_duration; }},
      {"sensors.noise_variance", [](ExperimentConfig& c) -> Slot { return &c.wideband.noise_variance; }},
      {"sensors.bias", [](ExperimentConfig& c) -> Slot { return &c.wideband.bias; }},
      {"sensors.time_constant", [](ExperimentConfig& c) -> Slot { return &c.slow_time_constant; }},
      {"aggregator.diff_range", [](ExperimentConfig& c) -> Slot { return &c.aggregator.diff_range; }},
      {"aggregator.slope_range", [](ExperimentConfig& c) -> Slot { return &c.aggregator.slope_range; }},
      {"aggregator.drift_gain", [](ExperimentConfig& c) -> Slot { return &c.aggregator.drift_gain; }},
      {"aggregator.gate_tolerance", [](ExperimentConfig& c) -> Slot { return &c.aggregator.gate_tolerance; }},
      {"fuzzy.w1_very_small", [](ExperimentConfig& c) -> Slot { return &c.w1_consequents.very_small; }},
      {"fuzzy.w1_small", [](ExperimentConfig& c) -> Slot { return &c.w1_consequents.small; }},
      {"fuzzy.w1_large", [](ExperimentConfig& c) -> Slot { return &c.w1_consequents.large; }},
      {"fuzzy.w1_very_large", [](ExperimentConfig& c) -> Slot { return &c.w1_consequents.very_large; }},
      {"fuzzy.drift_small", [](ExperimentConfig& c) -> Slot { return &c.drift_consequents.small; }},
      {"fuzzy.drift_large", [](ExperimentConfig& c) -> Slot { return &c.drift_consequents.large; }},
      {"predictor.window", [](ExperimentConfig& c) -> Slot { return &c.predictor.window; }},
      {"predictor.rules", [](ExperimentConfig& c) -> Slot { return &c.predictor.rules; }},
      {"predictor.alpha", [](ExperimentConfig& c) -> Slot { return &c.predictor.alpha; }},
      {"predictor.error_threshold", [](ExperimentConfig& c) -> Slot { return &c.predictor.error_threshold; }},
      {"predictor.max_iters", [](ExperimentConfig& c) -> Slot { return &c.predictor.max_iters; }},
      {"predictor.sigma_floor", [](ExperimentConfig& c) -> Slot { return &c.predictor.sigma_floor; }},
      {"predictor.init_jitter", [](ExperimentConfig& c) -> Slot { return &c.predictor.init_jitter; }},
      {"predictor.init_width_scale", [](ExperimentConfig& c) -> Slot { return &c.predictor.init_width_scale; }},
      {"metrics.tail_start", [](ExperimentConfig& c) -> Slot { return &c.tail_start; }},
  };
  return params;
}

const Parameter* find_parameter(std::string_view path) {
  for (const auto& p : registry()) {
    if (p.path == path) return &p;
  }
  return nullptr;
}

constexpr std::string_view kSweepAxisKey = "sweep.axis";
constexpr std::string_view kSweepModesKey = "sweep.modes";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.size() - start : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_real(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Shorter form for CSV cells; still enough digits to distinguish runs.
std::string csv_real(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string join_values(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_real(values[i]);
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

MetricsReport failed_metrics() { return {kNaN, kNaN, kNaN, kNaN}; }

}  // namespace

SimulationSetup ExperimentConfig::setup() const {
  SimulationSetup s;
  s.plant = plant;
  s.wideband = wideband;
  s.slow_time_constant = slow_time_constant;
  s.aggregator = aggregator;
  s.aggregator.sample_period = plant.dt;
  s.predictor = predictor;
  s.seed = seed;
  try {
    s.aggregator.rules = RuleBase(w1_consequents, drift_consequents);
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  if (!(tail_start >= 0.0 && tail_start <= plant.duration)) {
    throw ConfigError("metrics.tail_start", "must lie within [0, run.duration]");
  }
  return s;
}

std::vector<std::string_view> parameter_paths() {
  std::vector<std::string_view> out;
  for (const auto& p : registry()) out.push_back(p.path);
  return out;
}

bool is_parameter(std::string_view path) { return find_parameter(path) != nullptr; }

double get_parameter(const ExperimentConfig& cfg, std::string_view path) {
  const auto* p = find_parameter(path);
  if (!p) throw ConfigError(std::string(path), "unknown parameter");
  auto copy = cfg;
  return std::visit([](auto field) { return static_cast<double>(*field); }, p->slot(copy));
}

void set_parameter(ExperimentConfig& cfg, std::string_view path, double value) {
  const auto* p = find_parameter(path);
  const std::string key(path);
  if (!p) throw ConfigError(key, "unknown parameter");
  if (!std::isfinite(value)) throw ConfigError(key, "value must be finite");
  std::visit(
      [&](auto field) {
        using T = std::remove_cvref_t<decltype(*field)>;
        if constexpr (std::is_same_v<T, double>) {
          *field = value;
        } else {
          if (value < 0.0 || value != std::floor(value) || value > 9.007199254740992e15) {
            throw ConfigError(key, "expects a non-negative integer, got " + format_real(value));
          }
          *field = static_cast<T>(value);
        }
      },
      p->slot(cfg));
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::map<std::string, std::size_t, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    auto line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto where = " (line " + std::to_string(line_no) + ")";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line), "expected 'key = value'" + where);
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const std::string key_str(key);
    if (key.empty()) throw ConfigError("", "missing key" + where);
    if (auto it = seen.find(key); it != seen.end()) {
      throw ConfigError(key_str, "duplicate key" + where + ", first set on line " +
                                     std::to_string(it->second));
    }
    seen.emplace(key_str, line_no);

    if (key == kSweepAxisKey) {
      try {
        base.sweep_axis = parse_axis(value);
      } catch (const ConfigError& e) {
        throw ConfigError(key_str, e.what() + where);
      }
    } else if (key == kSweepModesKey) {
      try {
        base.sweep_modes = parse_modes(value);
      } catch (const ConfigError& e) {
        throw ConfigError(key_str, e.what() + where);
      }
    } else if (is_parameter(key)) {
      const auto number = parse_real(value);
      if (!number) {
        throw ConfigError(key_str, "not a number: '" + std::string(value) + "'" + where);
      }
      set_parameter(base, key, *number);
    } else {
      throw ConfigError(key_str, "unknown key" + where);
    }
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out = "# resolved experiment configuration\n";
  for (const auto& p : registry()) {
    out += p.path;
    out += " = ";
    auto copy = cfg;
    out += std::visit(
        [](auto field) -> std::string {
          using T = std::remove_cvref_t<decltype(*field)>;
          if constexpr (std::is_same_v<T, double>) {
            return format_real(*field);
          } else {
            return std::to_string(*field);
          }
        },
        p.slot(copy));
    out += '\n';
  }
  if (cfg.sweep_axis) {
    out += std::string(kSweepAxisKey) + " = " + cfg.sweep_axis->path + "=" +
           join_values(cfg.sweep_axis->values) + "\n";
  }
  if (!cfg.sweep_modes.empty()) {
    out += std::string(kSweepModesKey) + " = ";
    for (std::size_t i = 0; i < cfg.sweep_modes.size(); ++i) {
      if (i) out += ',';
      out += to_string(cfg.sweep_modes[i]);
    }
    out += '\n';
  }
  return out;
}

std::string config_digest(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : serialize_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::optional<std::vector<double>> default_sweep_values(std::string_view path) {
  if (path == "sensors.time_constant") return std::vector{0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4};
  if (path == "sensors.noise_variance") return std::vector{0.0025, 0.005, 0.01, 0.02, 0.04};
  if (path == "sensors.bias") return std::vector{-0.04, -0.02, 0.0, 0.02, 0.04};
  return std::nullopt;
}

SweepAxis parse_axis(std::string_view spec) {
  spec = trim(spec);
  const auto eq = spec.find('=');
  SweepAxis axis;
  axis.path = std::string(trim(spec.substr(0, eq)));
  if (!is_parameter(axis.path)) {
    throw ConfigError(axis.path, "sweep axis must name a numeric parameter");
  }
  if (axis.path == "run.dt") {
    throw ConfigError(axis.path, "the step size cannot be swept");
  }
  if (eq == std::string_view::npos) {
    auto defaults = default_sweep_values(axis.path);
    if (!defaults) throw ConfigError(axis.path, "no default grid; give values as path=v1,v2");
    axis.values = std::move(*defaults);
    return axis;
  }
  for (const auto item : split(spec.substr(eq + 1), ',')) {
    const auto value = parse_real(item);
    if (!value) throw ConfigError(axis.path, "bad sweep value '" + std::string(item) + "'");
    axis.values.push_back(*value);
  }
  return axis;
}

std::vector<FeedbackMode> parse_modes(std::string_view list) {
  std::vector<FeedbackMode> modes;
  for (const auto item : split(list, ',')) {
    const auto mode = parse_feedback_mode(item);
    if (!mode) throw ConfigError("", "unknown mode '" + std::string(item) + "'");
    modes.push_back(*mode);
  }
  return modes;
}

RunResult execute(const ExperimentConfig& cfg, FeedbackMode mode) {
  const auto setup = cfg.setup();
  RunResult result;
  result.mode = mode;
  result.seed = cfg.seed;
  result.digest = config_digest(cfg);
  try {
    result.trajectory = simulate(setup, mode);
    result.metrics = evaluate(result.trajectory, cfg.tail_start);
  } catch (const PendulumFell& fell) {
    result.fell = true;
    result.fall_time = fell.time();
    result.trajectory = fell.partial();
    result.metrics = failed_metrics();
  }
  return result;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
  os << "time,truth,s1,s2,estimate,w1,drift,prediction,prediction_used,force\n";
  for (const auto& r : trajectory.records) {
    os << csv_real(r.time) << ',' << csv_real(r.truth) << ',' << csv_real(r.s1) << ','
       << csv_real(r.s2) << ',' << csv_real(r.estimate) << ',' << csv_real(r.w1) << ','
       << csv_real(r.drift) << ',' << csv_real(r.prediction.value_or(kNaN)) << ','
       << (r.prediction_used ? 1 : 0) << ',' << csv_real(r.force) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const RunResult& result) {
  os << "mode,iae,itae,peak_to_peak_tail,seed,config_digest,status\n";
  os << to_string(result.mode) << ',' << csv_real(result.metrics.iae) << ','
     << csv_real(result.metrics.itae) << ',' << csv_real(result.metrics.peak_to_peak_tail) << ','
     << result.seed << ',' << result.digest << ',' << (result.fell ? "fell" : "ok") << '\n';
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "axis_value,mode,iae,itae,peak_to_peak_tail,status\n";
  for (const auto& r : rows) {
    os << csv_real(r.axis_value) << ',' << to_string(r.mode) << ',' << csv_real(r.metrics.iae)
       << ',' << csv_real(r.metrics.itae) << ',' << csv_real(r.metrics.peak_to_peak_tail) << ','
       << (r.fell ? "fell" : "ok") << '\n';
  }
}

RunResult run_experiment(const ExperimentConfig& cfg, FeedbackMode mode,
                         const std::filesystem::path& out_dir) {
  auto result = execute(cfg, mode);
  prepare_dir(out_dir);
  std::ostringstream traj, summary;
  write_trajectory_csv(traj, result.trajectory);
  write_summary_csv(summary, result);
  write_file(out_dir / "trajectory.csv", traj.str());
  write_file(out_dir / "summary.csv", summary.str());
  write_file(out_dir / "config.txt", serialize_config(cfg));
  return result;
}

std::vector<SweepRow> sweep(const ExperimentConfig& cfg, const SweepAxis& axis,
                            std::span<const FeedbackMode> modes, unsigned jobs) {
  if (axis.values.empty()) throw ConfigError(axis.path, "sweep axis has no values");
  if (modes.empty()) throw ConfigError("", "sweep needs at least one mode");

  // Resolve every point up front so config errors surface before any work.
  std::vector<ExperimentConfig> points;
  std::vector<std::size_t> order(axis.values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return axis.values[a] < axis.values[b]; });
  for (const auto i : order) {
    auto point = cfg;
    set_parameter(point, axis.path, axis.values[i]);
    try {
      (void)point.setup();
    } catch (const ConfigError& e) {
      throw ConfigError(axis.path, "value " + format_real(axis.values[i]) + " rejected: " + e.what());
    }
    points.push_back(std::move(point));
  }

  std::vector<SweepRow> rows(points.size() * modes.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t j = next++; j < rows.size(); j = next++) {
      const auto& point = points[j / modes.size()];
      const auto mode = modes[j % modes.size()];
      try {
        const auto result = execute(point, mode);
        rows[j] = {get_parameter(point, axis.path), mode, result.metrics, result.fell};
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = rows.size();
      }
    }
  };
  const unsigned n = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(rows.size()));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (unsigned t = 0; t < n; ++t) threads.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return rows;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const SweepAxis& axis,
                                std::span<const FeedbackMode> modes,
                                const std::filesystem::path& out_dir, unsigned jobs) {
  auto rows = sweep(cfg, axis, modes, jobs);
  prepare_dir(out_dir);
  std::ostringstream os;
  write_sweep_csv(os, rows);
  write_file(out_dir / "sweep.csv", os.str());
  auto echoed = cfg;
  echoed.sweep_axis = axis;
  echoed.sweep_modes.assign(modes.begin(), modes.end());
  write_file(out_dir / "config.txt", serialize_config(echoed));
  return rows;
}

}  // namespace fuzzy_fusion
