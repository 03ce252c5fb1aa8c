#pragma once

#include "fwm/collective_spin.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <variant>

namespace fwm {

/// Coherent amplitudes alpha_M = -i C M of the single effective signal mode, one per Dicke component.
Eigen::VectorXcd signal_mode_amplitudes(int two_s, double strength);

/// ceil((C S)^2) + 10 ceil(C S) + 20.
int default_photon_cutoff(double strength, double spin);

/// P(n) = sum_M |A_M|^2 Poisson(n; eta (C M)^2) for n = 0..n_max.
/// eta < 1 models a detector of efficiency eta; eta = 1 is the ideal counter.
Eigen::VectorXd photon_distribution(const CollectiveState& prior, double strength,
                                    std::optional<int> n_max = std::nullopt, double eta = 1.0);

/// Probability of a single outcome; exact (no truncation).
double outcome_probability(const CollectiveState& prior, double strength, int n, double eta = 1.0);

/// Posterior after detecting n photons with an ideal counter:
/// c_M proportional to A_M (i C M)^n exp(-(C M)^2 / 2).
/// Throws std::domain_error when the outcome has zero probability.
CollectiveState collapse_ideal(const CollectiveState& prior, double strength, int n);

/// Posterior density matrix when the signal passes a beam splitter of transmissivity eta
/// before an ideal counter and the reflected part is traced out.
MixedCollectiveState collapse_lossy(const CollectiveState& prior, double strength, int n, double eta);

using Posterior = std::variant<CollectiveState, MixedCollectiveState>;

struct MeasurementRecord {
  int n_m = 0;
  double probability = 0.0;
  double strength = 0.0;  ///< C
  double eta = 1.0;
  Posterior posterior;
};

/// Record for a prescribed outcome; pure posterior for eta = 1, mixed otherwise.
MeasurementRecord measure(const CollectiveState& prior, double strength, int n, double eta = 1.0);

/// Draws n from the photon distribution with a generator seeded by `seed` and attaches the posterior.
MeasurementRecord sample_outcome(const CollectiveState& prior, double strength, std::uint64_t seed, double eta = 1.0);

struct CatAnalysis {
  double peak_plus = 0.0;   ///< M of the largest |c_M|^2 with M > 0
  double peak_minus = 0.0;  ///< M of the largest |c_M|^2 with M < 0
  double separation = 0.0;
  /// Weight in the central half of the interval between the peaks.
  double overlap = 0.0;
  /// No dip between the two candidates; both peaks are set to the global maximum.
  bool unimodal = false;
};

CatAnalysis cat_analysis(const CollectiveState& posterior);

}  // namespace fwm
