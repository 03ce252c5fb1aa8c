#pragma once

#include "fwm/measurement.hpp"
#include "fwm/scenario.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fwm {

inline constexpr int kReportSchemaVersion = 1;

struct RunOptions {
  std::optional<std::uint64_t> seed;  ///< overrides the config seed
  std::filesystem::path out_dir = ".";
  int threads = 0;                    ///< 0 uses the hardware concurrency
  std::string timestamp;              ///< written as provenance.generated_at; empty means now
};

/// One row of sweep.csv.
struct PointResult {
  std::size_t index = 0;
  double strength = 0.0;
  int n_atoms = 0;
  double eta = 1.0;
  std::uint64_t seed = 0;
  std::optional<MeasurementRecord> record;
  double xi2_wineland = 0.0;
  double xi2_kitagawa = 0.0;
  double var_z = 0.0;
  double mean_x = 0.0;
  CatAnalysis cat;
  std::string error;  ///< non-empty when the point could not be evaluated
};

struct PointSpec {
  double strength = 0.0;
  int n_atoms = 1;
  int n_m = 0;
  double eta = 1.0;
  bool sampled = false;
  std::uint64_t seed = 0;
};

/// CSS prior, detection, posterior metrics.
PointResult evaluate_point(const PointSpec& spec);

/// Grid of sweep points in row-major order over (C, N_a, n_m, eta).
std::vector<PointSpec> expand_sweep(const Scenario& scenario, double strength, std::uint64_t master_seed);

nlohmann::ordered_json to_json(const MeasurementRecord& record, bool full_matrix);

struct RunSummary {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
  nlohmann::ordered_json report;
};

/// Executes the scenario and writes report.json plus CSV tables into options.out_dir.
RunSummary run_scenario(const LoadedScenario& loaded, const RunOptions& options);

/// "# key: value" header lines shared by every CSV output.
std::string csv_header(const std::string& config_hash, std::uint64_t seed, const std::string& kind);

}  // namespace fwm
