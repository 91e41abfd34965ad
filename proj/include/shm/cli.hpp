#pragma once

// Batch front end: configuration, single solves, modulation-index sweeps and
// result files.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shm/dual_solver.hpp"
#include "shm/dynamics.hpp"

namespace shm::cli {

inline constexpr const char* kGridEnvVar = "SHM_GRID_SIZE";

struct RunConfig {
  std::vector<int> freq_a{1, 5, 7, 11, 13};
  std::vector<int> freq_b{1, 5, 7, 11, 13};
  std::optional<std::vector<double>> target_a;  // zeros when unset
  std::optional<std::vector<double>> target_b;
  SolverConfig solver;
  double m_min = -0.8;
  double m_max = 0.8;
  int m_steps = 33;
  std::string out = "shm_result.json";
  std::string summary;         // sweep summary table; defaults to <out>.summary.csv
  std::string format = "json";  // solve output: json or csv (t,u samples)
  bool warm_start = true;
  int threads = 1;  // sweep parallelism, only used without warm starts
  int stride = 1;   // write every stride-th grid node in the sweep table

  /// Defaults with the grid size taken from SHM_GRID_SIZE when set.
  static RunConfig defaults();

  /// Harmonic spec for single solves.
  HarmonicSpec spec() const;

  /// Spec with targets (m, 0, ..., 0) on both the cosine and sine blocks.
  HarmonicSpec sweep_spec(double m) const;

  std::vector<double> modulation_indices() const;
  std::string summary_path() const { return summary.empty() ? out + ".summary.csv" : summary; }

  /// Throws ConfigError.
  void validate() const;
};

/// Applies one `key = value` setting; keys match the long flag names. Throws ConfigError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads a flat key-value file ('#' starts a comment) on top of `base`.
RunConfig load_config_file(const std::string& path, RunConfig base);

/// Keys accepted by apply_setting, in documentation order.
const std::vector<std::string>& setting_keys();

nlohmann::json report_to_json(const SolveReport& report, const HarmonicSpec& spec, const SolverConfig& cfg);

struct ParsedResult {
  HarmonicSpec spec;
  SolverConfig solver;
  SolveReport report;  // u_samples are not stored in the document
  std::string status;
};

ParsedResult report_from_json(const nlohmann::json& doc);

/// "ok", "not_converged", "not_staircase" or "residual_above_bound".
std::string solve_status(const SolveReport& report, const SolverConfig& cfg);

struct SweepPoint {
  double m = 0.0;
  SolveReport report;
  std::string status;
};

std::vector<SweepPoint> run_sweep(const RunConfig& cfg);

void write_sweep_table(const std::vector<SweepPoint>& points, const TimeGrid& grid, int stride, std::ostream& os);
void write_sweep_summary(const std::vector<SweepPoint>& points, const SolverConfig& cfg, std::ostream& os);

/// Exit code 0 when converged, staircase-valid and inside the residual bound; 1 otherwise.
int cmd_solve(const RunConfig& cfg, std::ostream& log);

/// Exit code 0 when every modulation index succeeds; 1 otherwise.
int cmd_sweep(const RunConfig& cfg, std::ostream& log);

/// Entry point for `shm solve|sweep [flags]`; configuration errors exit with 2.
int run(int argc, char** argv);

}  // namespace shm::cli
