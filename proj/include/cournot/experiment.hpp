#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cournot/congestion.hpp"
#include "cournot/measures.hpp"

namespace cournot::app {

/// Bad configuration: unknown preset, malformed JSON, wrong field type.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { Congestion, BestReply, Sinkhorn, BestReplyAndSinkhorn };

struct InitialDensity {
  std::string kind = "uniform";  // "uniform" or "uniform_on"
  double a = 0.0;
  double b = 0.0;
};

struct ExperimentConfig {
  std::string preset;
  Method method = Method::Congestion;
  std::string cost = "arc_quadratic";
  std::optional<double> p;
  double y_min = 0.0;
  double y_max = 1.0;
  Index n_cells = 200;
  QuarterDiskSampler sampler;
  double potential_strength = 0.0;
  double potential_center = 0.0;
  double potential_shift = 0.0;
  double interaction_strength = 0.0;
  double fprime_shift = 0.0;
  SolverConfig solver;
  double epsilon = 1e-3;
  /// Functional on the nu side of the Sinkhorn solver: "interaction" or "congestion".
  std::string sinkhorn_functional = "interaction";
  InitialDensity nu0;
  std::string output_dir = "out";
  int curve_resolution = 400;
  int curve_count = 10;
  Index stride = 1;

  Grid1D grid() const { return {y_min, y_max, n_cells}; }
  nlohmann::json to_json() const;
};

std::vector<std::string> preset_names();
/// Full parameter set of a named experiment; ConfigError if unknown.
ExperimentConfig preset(const std::string& name);

/// Expands "preset" (if present) and applies every other field on top.
ExperimentConfig parse_config(const nlohmann::json& j);
/// Reads and parses a JSON file; errors carry the file name and line.
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a hash of the canonical JSON dump of the config.
std::uint64_t config_hash(const ExperimentConfig& config);

const char* method_name(Method method);

struct ComparisonReport {
  double w1 = 0.0;
  double l1 = 0.0;
  /// argmax(b) - argmax(a) in cells.
  Index argmax_offset = 0;
  /// support_size(a) - support_size(b).
  Index support_difference = 0;

  std::vector<std::pair<std::string, double>> rows() const;
};

/// ShapeError when the grids differ.
ComparisonReport compare(const GridMeasure1D& a, const GridMeasure1D& b);

struct RunOptions {
  std::optional<Method> method;
  std::optional<std::filesystem::path> export_coupling;
};

struct RunOutcome {
  bool converged = false;
  nlohmann::json manifest;
  std::vector<GridMeasure1D> densities;

  int exit_code() const { return converged ? 0 : 2; }
};

/// Runs the configured solver(s), writes CSV outputs and manifest.json into
/// config.output_dir and logs one summary line per solver to `log`.
RunOutcome run(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

/// Runs the configured equilibrium solve (best reply for the combined
/// method) and reports nestedness of its profile as JSON
/// {is_nested, violations, worst_margin, grid, stride}.
nlohmann::json nestedness_report(const ExperimentConfig& config);

}  // namespace cournot::app
