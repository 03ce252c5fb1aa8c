#pragma once

// Brute-force reference computations shared by the test suites and the `oracle` CLI command.
// Everything here is deliberately naive and restricted to small sizes.

#include "fwm/atom_dynamics.hpp"

#include <Eigen/Dense>

namespace fwm::oracle {

inline constexpr int kMaxTwoS = 8;          // S <= 4
inline constexpr int kMaxPhotonCutoff = 64;

/// A(S, M) from exact factorial products, M = -S..S.
Eigen::VectorXd css_factorial(int n_atoms);

/// Joint amplitudes psi(k, n) of exp[-i C (c^dag + c) S_z] applied to atoms (x) |0>,
/// by a dense matrix exponential on the truncated atoms (x) Fock space.
Eigen::MatrixXcd fock_evolve(const Eigen::VectorXcd& atoms, double strength, int cutoff = kMaxPhotonCutoff);

struct Projection {
  double probability = 0.0;
  Eigen::VectorXcd atoms;  ///< normalized; empty when probability is zero
};

/// Projects the photon mode of a joint state onto |n>.
Projection project_photons(const Eigen::MatrixXcd& joint, int n);

/// Atomic density matrix conditioned on n counts behind a beam splitter of transmissivity eta.
/// Displacement, beam splitter and trace are all carried out in a two-mode Fock space.
Eigen::MatrixXcd beam_splitter_posterior(const Eigen::VectorXcd& atoms, double strength, int n, double eta,
                                         int cutoff = 30);

/// Exit field for a uniform sigma11 - sigma22 = s and constant K: E0 - i n_a K s L.
Complex uniform_profile_exit_field(Complex input, Complex coupling_k, double density, double s, double length);

/// d sigma/dt from -i[H, rho] with rho = sigma^T and the rotating-frame four-level Hamiltonian.
Eigen::Matrix4cd hamiltonian_rhs(const PulseSet& pulses, double t, const Eigen::Matrix4cd& sigma);

}  // namespace fwm::oracle
