#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace fwm {

using Complex = std::complex<double>;

enum class PulseShape {
  kOff,
  kConstant,  ///< square pulse on [0, T]
  kFlatTop,   ///< sin^2 rise and fall of length `ramp`, flat in between
  kGaussian,  ///< exp(-((t - T/2)/ramp)^2) on [0, T]
};

PulseShape parse_pulse_shape(const std::string& name);
std::string to_string(PulseShape shape);

/// Classical Rabi envelope chi(t) in rad/s; zero outside [0, T].
struct PulseEnvelope {
  PulseShape shape = PulseShape::kOff;
  Complex amplitude = 0.0;
  double duration = 1.0;
  double ramp = 0.0;

  Complex operator()(double t) const;
  double peak() const { return shape == PulseShape::kOff ? 0.0 : std::abs(amplitude); }
};

/// Spatially phased Rabi frequencies Lambda_i(r, t) = chi_i(t) exp(i k_i . r).
struct RabiFrequencies {
  Complex pump1, pump2, probe;
};

/// The two pumps (1->4, 2->4), the probe (1->3) and their detunings.
struct PulseSet {
  PulseEnvelope chi1, chi2, chip;
  double detuning = 1.0;        ///< one-photon pump detuning Delta (rad/s)
  double probe_detuning = 1.0;  ///< one-photon probe detuning Delta_p (rad/s)
  double raman_detuning = 0.0;  ///< two-photon detuning delta (rad/s)
  Eigen::Vector3d k1 = Eigen::Vector3d::Zero();
  Eigen::Vector3d k2 = Eigen::Vector3d::Zero();
  Eigen::Vector3d kp = Eigen::Vector3d::Zero();
  double omega1 = 0.0, omega2 = 0.0, omega_p = 0.0;  ///< carrier frequencies (rad/s)
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  ///< atom position r (m)

  RabiFrequencies rabi(double t) const;
  double duration() const;
  /// Largest |chi| / min(|Delta|, |Delta_p|) over the three envelopes.
  double perturbative_ratio() const;
  /// Non-fatal validity notes (|delta| >= |Delta| etc.).
  std::vector<std::string> validity_warnings() const;
};

/// Expectations sigma_ij = <|i><j|> of the slowly varying single-atom operators.
/// Levels are 1-based in accessors: 1, 2 ground; 3, 4 excited.
struct AtomState {
  Eigen::Matrix4cd sigma = Eigen::Matrix4cd::Zero();

  Complex operator()(int i, int j) const { return sigma(i - 1, j - 1); }
  Complex& operator()(int i, int j) { return sigma(i - 1, j - 1); }

  double trace() const { return sigma.trace().real(); }
  double hermiticity_error() const { return (sigma - sigma.adjoint()).cwiseAbs().maxCoeff(); }

  /// Ground-manifold state with empty excited levels.
  static AtomState ground(double s11, double s22, Complex s12);
  /// sigma11 = sigma22 = 1/2, sigma12 = -1/2.
  static AtomState x_polarized();
};

/// Radiative damping of the excited levels.
struct DecayModel {
  double gamma = 0.0;        ///< decay rate of level 3 (rad/s)
  double gamma_prime = 0.0;  ///< decay rate of level 4 (rad/s)
  double branch31 = 0.5;     ///< fraction of level-3 decay into level 1 (rest into 2)
  double branch41 = 0.5;     ///< fraction of level-4 decay into level 1 (rest into 2)

  void validate() const;
};

struct AtomTrajectory {
  std::vector<double> times;
  std::vector<AtomState> states;
  /// Richardson estimate of the max step error (0 when not requested).
  double error_estimate = 0.0;
};

struct IntegrationOptions {
  int record_every = 1;
  bool estimate_error = false;
};

/// Right-hand side of the slowly varying operator equations, optionally with damping.
Eigen::Matrix4cd obe_rhs(const PulseSet& pulses, const std::optional<DecayModel>& decay, double t,
                         const Eigen::Matrix4cd& sigma);

/// Fixed-step RK4 integration from t = 0 to t_end.
/// Throws when dt * max(|Delta|, |Delta_p|) > 0.1 or `init` is not a unit-trace Hermitian state.
AtomTrajectory integrate_obe(const PulseSet& pulses, const AtomState& init, const std::optional<DecayModel>& decay,
                             double t_end, double dt, IntegrationOptions options = {});

/// Ground-manifold values (sigma11, sigma22, sigma12) used by the perturbative expressions.
struct GroundValues {
  double s11 = 0.5;
  double s22 = 0.5;
  Complex s12 = -0.5;

  Complex s21() const { return std::conj(s12); }
  static GroundValues from(const AtomState& s);
};

struct FirstOrderCoherences {
  Complex s14, s24, s13, s23;
  std::vector<std::string> warnings;
};

/// Adiabatic first-order ground-excited coherences.
FirstOrderCoherences first_order_coherences(const PulseSet& pulses, double t, const GroundValues& g);

struct PopulationRates {
  double d11 = 0.0;
  double d22 = 0.0;
};

/// Second-order Raman rate of the ground populations.
PopulationRates ground_population_rate(const PulseSet& pulses, double t, const GroundValues& g);

struct SecondOrderSources {
  Complex s34;
  Complex s12;
};

/// sigma34 and sigma12 to second order; throws at delta = 0.
SecondOrderSources second_order_sources(const PulseSet& pulses, double t, const GroundValues& g);

struct Sigma23Expansion {
  /// Four contributions in order: probe-direction first-order term, phase-matched Raman term,
  /// phase-matched term suppressed by delta/Delta_p, probe-direction light-shift term.
  Complex terms[4];
  Complex full;           ///< sum of the four terms
  Complex phase_matched;  ///< terms[1] alone
  std::vector<std::string> warnings;
};

/// Third-order sigma23 and its phase-matched part.
Sigma23Expansion perturbative_sigma23(const PulseSet& pulses, double t, const GroundValues& g);

/// gamma'(chi2^2 - chi1^2)/Delta^2 - gamma chi_p^2/Delta_p^2; zero when the decay terms balance.
/// The pump on 2->4 must exceed the one on 1->4 to offset the probe's depletion of level 1.
double dark_state_balance(double chi1, double chi2, double chip, double detuning, double probe_detuning,
                          double gamma, double gamma_prime);

/// chi2 that zeroes dark_state_balance for given chi1, chi_p.
double balanced_pump2(double chi1, double chip, double detuning, double probe_detuning, double gamma,
                      double gamma_prime);

struct SteadyCoherence {
  double value = 0.0;
  /// |value| > 1/2, i.e. outside the range of a physical ground coherence.
  bool flagged = false;
};

/// -(chi1/chi2)/2, the quasi-steady ground coherence followed during the pulses.
SteadyCoherence steady_coherence(double chi1, double chi2);

}  // namespace fwm
