#pragma once

#include "fwm/atom_dynamics.hpp"
#include "fwm/signal_field.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fwm {

/// Problem in a config file, carrying the 1-based line/column of the offending node (0 when unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0, int column = 0);
  int line() const { return line_; }
  int column() const { return column_; }
  /// "path:line:col: error: message"
  std::string format(const std::string& path) const;

 private:
  int line_, column_;
};

enum class RunMode { kDarkState, kMeasurement, kSweep };
enum class Units { kScaled, kSI };
enum class OutcomePolicy { kFixed, kSampled };

struct AtomInit {
  double s11 = 0.5, s22 = 0.5;
  Complex s12 = -0.5;
};

struct SweepAxes {
  std::vector<double> strength;
  std::vector<int> n_atoms;
  std::vector<int> n_m;
  std::vector<double> eta;
};

struct HusimiRequest {
  int n_theta = 0;
  int n_phi = 0;
  bool enabled() const { return n_theta > 0 && n_phi > 0; }
};

struct Scenario {
  RunMode mode = RunMode::kMeasurement;
  Units units = Units::kScaled;
  std::uint64_t seed = 0;

  std::optional<int> n_atoms;
  AtomInit atom_init;

  bool has_pulses = false;
  PulseSet pulses;
  std::optional<DecayModel> decay;
  double dt = 0.0;  ///< 0 picks 0.05 / max(|Delta|, |Delta_p|)
  int record_every = 1;
  double t_end = 0.0;  ///< 0 means the pulse duration

  std::optional<Geometry> geometry;
  std::optional<double> d23;
  int coupling_samples = 2001;
  std::optional<double> strength_override;  ///< C given directly

  double eta = 1.0;
  OutcomePolicy outcome = OutcomePolicy::kFixed;
  int n_m = 0;

  SweepAxes sweep;
  HusimiRequest husimi;
  bool full_density_matrix = false;
  bool write_trajectory = true;

  bool physical_coupling() const { return geometry.has_value() || d23.has_value(); }
};

/// Parsed scenario plus the SHA-256 of the raw file bytes.
struct LoadedScenario {
  Scenario scenario;
  std::string hash;
  std::vector<std::string> warnings;
};

/// Parses and validates; throws ConfigError with line information.
LoadedScenario load_scenario(const std::string& path);
LoadedScenario parse_scenario(const std::string& text);

std::string sha256_hex(const std::string& bytes);

/// Quantities derivable without running: C, phase-match residual, chi/Delta ratios.
struct Derived {
  std::optional<double> strength;
  std::optional<long> geometry_atoms;
  std::optional<PhaseMatch> phase;
  double perturbative_ratio = 0.0;
  std::vector<std::string> warnings;
};

/// Threshold on max chi / min(Delta, Delta_p) beyond which a warning is emitted.
inline constexpr double kPerturbativeWarning = 0.1;

Derived derive(const Scenario& scenario);

/// splitmix64 finalizer applied to master + (index + 1) * 0x9E3779B97F4A7C15.
std::uint64_t point_seed(std::uint64_t master, std::uint64_t index);

}  // namespace fwm
