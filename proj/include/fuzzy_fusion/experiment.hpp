#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fuzzy_fusion/metrics.hpp"
#include "fuzzy_fusion/plant.hpp"

namespace fuzzy_fusion {

/// Invalid configuration. key() names the offending parameter path (empty
/// when the problem is not tied to one key).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct SweepAxis {
  std::string path;
  std::vector<double> values;
};

/// All tunables of an experiment, addressable by dotted parameter paths such
/// as "sensors.time_constant" (see parameter_paths()).
struct ExperimentConfig {
  BenchmarkConfig plant;
  WidebandSensorSpec wideband;
  double slow_time_constant = 0.5;
  AggregatorConfig aggregator;
  WeightConsequents w1_consequents;
  DriftConsequents drift_consequents;
  PredictorSettings predictor;
  std::uint64_t seed = 1;
  double tail_start = 15.0;

  std::optional<SweepAxis> sweep_axis;
  std::vector<FeedbackMode> sweep_modes;

  /// Builds the simulation inputs; validation failures become ConfigError.
  SimulationSetup setup() const;
};

/// Numeric parameter paths in canonical order.
std::vector<std::string_view> parameter_paths();
bool is_parameter(std::string_view path);
double get_parameter(const ExperimentConfig& cfg, std::string_view path);
/// Throws ConfigError for unknown paths or non-integral values of integer
/// parameters.
void set_parameter(ExperimentConfig& cfg, std::string_view path, double value);

/// Parses "key = value" lines ('#' starts a comment) on top of `base`.
/// Unknown or repeated keys and malformed values throw ConfigError.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text of the full effective configuration; parse_config of this
/// text reproduces the configuration exactly.
std::string serialize_config(const ExperimentConfig& cfg);
/// FNV-1a 64-bit hash of serialize_config, as 16 hex digits.
std::string config_digest(const ExperimentConfig& cfg);

/// "path=v1,v2,..." or a bare path with a built-in default grid.
SweepAxis parse_axis(std::string_view spec);
std::vector<FeedbackMode> parse_modes(std::string_view list);
std::optional<std::vector<double>> default_sweep_values(std::string_view path);

struct RunResult {
  FeedbackMode mode = FeedbackMode::Ideal;
  std::uint64_t seed = 0;
  bool fell = false;
  double fall_time = 0.0;
  MetricsReport metrics;  ///< NaN fields when the pendulum fell
  std::string digest;
  Trajectory trajectory;  ///< partial when the pendulum fell
};

/// Runs one closed loop in memory. Falls are reported, not thrown.
RunResult execute(const ExperimentConfig& cfg, FeedbackMode mode);

/// execute() plus trajectory.csv, summary.csv and config.txt in out_dir.
RunResult run_experiment(const ExperimentConfig& cfg, FeedbackMode mode,
                         const std::filesystem::path& out_dir);

struct SweepRow {
  double axis_value = 0.0;
  FeedbackMode mode = FeedbackMode::Ideal;
  MetricsReport metrics;
  bool fell = false;
};

/// One row per (axis value, mode), ordered by axis value then by the given
/// mode order, independent of how many worker threads ran the points.
std::vector<SweepRow> sweep(const ExperimentConfig& cfg, const SweepAxis& axis,
                            std::span<const FeedbackMode> modes, unsigned jobs = 1);

/// sweep() plus sweep.csv and config.txt in out_dir.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const SweepAxis& axis,
                                std::span<const FeedbackMode> modes,
                                const std::filesystem::path& out_dir, unsigned jobs = 1);

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);
void write_summary_csv(std::ostream& os, const RunResult& result);
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);

}  // namespace fuzzy_fusion
