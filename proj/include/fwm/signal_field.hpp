#pragma once

#include "fwm/atom_dynamics.hpp"
#include "fwm/collective_spin.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fwm {

/// Physical constants in whatever unit system the caller works in (SI by default).
struct PhysicalConstants {
  double hbar = 1.054571817e-34;     ///< J s
  double epsilon0 = 8.8541878128e-12;  ///< F/m
  double c = 299792458.0;            ///< m/s

  static PhysicalConstants si() { return {}; }
};

/// Pencil-shaped sample: transverse area A, length L, number density n_a.
struct Geometry {
  double area = 0.0;
  double length = 0.0;
  double density = 0.0;

  /// Throws unless all three are positive.
  void validate() const;
  double volume() const { return area * length; }
  /// n_a A L rounded to the nearest integer.
  long atom_number() const;
  /// Set when n_a A L is not within 1e-6 of an integer.
  bool atom_number_rounded() const;
};

struct PhaseMatch {
  double omega_s = 0.0;
  Eigen::Vector3d k_s = Eigen::Vector3d::Zero();
  /// | |k_s| - Omega_s/c | L, the accumulated phase slip over the sample (rad).
  double residual = 0.0;
  /// |k_s| perpendicular to z, times L.
  double transverse_residual = 0.0;
  bool flagged = false;
};

/// Phase slip above which phase_match raises its flag.
inline constexpr double kPhaseSlipTolerance = 0.1;

/// Signal frequency and wave vector; throws when Omega_s <= 0.
PhaseMatch phase_match(const Eigen::Vector3d& k1, const Eigen::Vector3d& k2, const Eigen::Vector3d& kp, double omega1,
                       double omega2, double omega_p, double length, double c = PhysicalConstants{}.c);

struct PhaseMatchAngles {
  double pump1 = 0.0;  ///< angle of k1 to the z axis, in the x-z plane
  double pump2 = 0.0;
  double probe = 0.0;
  Eigen::Vector3d k1, k2, kp;
};

/// Given the pump-1 angle, solves for pump-2 and probe angles that put k_s on the z axis
/// with |k_s| = Omega_s/c. Throws if no bracket is found.
PhaseMatchAngles tune_phase_matching(double omega1, double omega2, double omega_p, double pump1_angle,
                                     double c = PhysicalConstants{}.c);

/// chi1*(t) chi2(t) chi_p(t) / (Delta Delta_p delta); dimensionless.
Complex f_envelope(const PulseSet& pulses, double t);

/// sqrt(hbar Omega_s / (2 epsilon0 A L)).
double signal_field_normalization(double omega_s, const Geometry& geometry,
                                  const PhysicalConstants& k = PhysicalConstants::si());

/// Coupling inputs and their derived time series.
struct CouplingParams {
  double d23 = 0.0;      ///< dipole matrix element (C m)
  double omega_s = 0.0;  ///< signal carrier (rad/s)
  double k_s = 0.0;      ///< Omega_s / c (rad/m)
  double field_norm = 0.0;
  std::vector<double> times;
  std::vector<Complex> f_samples;
  std::vector<Complex> k_samples;  ///< K(t) = hbar k_s d23 f(t) / (2 epsilon0)
  double strength = 0.0;           ///< C
};

/// Dimensionless measurement strength C from sampled f(t) (trapezoid rule).
/// Throws on an empty or mismatched sample grid.
double coupling_C(double d23, double omega_s, const Geometry& geometry, std::span<const double> times,
                  std::span<const Complex> f_samples, const PhysicalConstants& k = PhysicalConstants::si());

/// Samples f and K on n_samples points over the pulse duration and evaluates C.
CouplingParams compute_coupling(const PulseSet& pulses, const Geometry& geometry, double d23, int n_samples = 2001,
                                const PhysicalConstants& k = PhysicalConstants::si());

/// E_out = E_in - i (2 K / A) S_z.
Complex output_field(Complex input, Complex coupling_k, double area, double sz);

/// Field at the sample exit on a time grid, integrated along characteristics.
struct PropagationProblem {
  std::function<double(double)> population_difference;  ///< sigma11 - sigma22 at z
  std::function<Complex(double)> input_field;            ///< E(0, t)
  std::function<Complex(double)> coupling;               ///< K(t)
  std::function<Complex(double)> initial_field;          ///< E(z, 0); zero when empty
};

struct PropagationGrid {
  int slices = 256;
  int quadrature_points = 5;  ///< Gauss-Legendre nodes per slice
  std::vector<double> times;
  double pulse_duration = 0.0;  ///< only used for the cT/L validity warning
};

struct PropagationResult {
  std::vector<double> times;
  std::vector<Complex> field;  ///< E(L, t)
  Eigen::VectorXd slice_average;  ///< sigma11 - sigma22 averaged over each slice
  std::vector<std::string> warnings;
};

PropagationResult propagate_numeric(const PropagationProblem& problem, const Geometry& geometry,
                                    const PropagationGrid& grid, double c = PhysicalConstants{}.c);

/// Slice averages of a profile on [0, L].
Eigen::VectorXd slice_averages(const std::function<double(double)>& profile, double length, int slices,
                               int quadrature_points = 5);

/// S_z = (N_a / 2L) * integral_0^L (sigma11 - sigma22) dz from slice averages.
double collective_sz(const Eigen::VectorXd& slice_average, double atom_number);

/// Signal intensity 4 |K|^2 / A^2 <S_z^2>.
double intensity(const CollectiveState& state, Complex coupling_k, double area);

}  // namespace fwm
