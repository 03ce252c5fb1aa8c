#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <string>

namespace fwm {

using Complex = std::complex<double>;

/// Largest atom number accepted by the Dicke-basis constructors.
inline constexpr int kMaxAtoms = 10000;

/// Pure collective state of N_a = 2S pseudo-spins in the Dicke basis |S,M>.
///
/// Amplitudes are stored with index k = M + S, so k = 0 is M = -S and
/// k = 2S is M = +S. The spin length is kept as the integer 2S to avoid
/// half-integer bookkeeping.
class CollectiveState {
 public:
  /// Normalizes `amplitudes`; throws if the size is not 2S+1 or the norm vanishes.
  CollectiveState(int two_s, Eigen::VectorXcd amplitudes);

  int two_s() const { return two_s_; }
  double spin() const { return 0.5 * two_s_; }
  Eigen::Index dim() const { return amplitudes_.size(); }

  double m_of(Eigen::Index k) const { return static_cast<double>(k) - spin(); }
  Eigen::Index index_of(double m) const;

  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Complex amplitude(double m) const { return amplitudes_(index_of(m)); }

  /// |c_M|^2 in index order.
  Eigen::VectorXd weights() const { return amplitudes_.cwiseAbs2(); }

 private:
  int two_s_;
  Eigen::VectorXcd amplitudes_;
};

/// Mixed collective state; rho is expressed in the same index order as CollectiveState.
class MixedCollectiveState {
 public:
  /// Rescales to unit trace and symmetrizes; throws on non-Hermitian input beyond 1e-12
  /// (relative) or a vanishing trace.
  MixedCollectiveState(int two_s, Eigen::MatrixXcd rho);

  static MixedCollectiveState from_pure(const CollectiveState& psi);

  int two_s() const { return two_s_; }
  double spin() const { return 0.5 * two_s_; }
  Eigen::Index dim() const { return rho_.rows(); }
  double m_of(Eigen::Index k) const { return static_cast<double>(k) - spin(); }

  const Eigen::MatrixXcd& rho() const { return rho_; }
  double purity() const;
  double min_eigenvalue() const;

 private:
  int two_s_;
  Eigen::MatrixXcd rho_;
};

struct SpinMoments {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double mean_z = 0.0;
  double var_z = 0.0;
  /// Smallest variance over directions orthogonal to the mean spin.
  double var_perp_min = 0.0;
  /// Symmetrized covariance of (S_x, S_y, S_z).
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  /// Set when the mean spin vanishes; var_perp_min is then taken over all directions.
  bool zero_mean_spin = false;

  Eigen::Vector3d mean() const { return {mean_x, mean_y, mean_z}; }
};

struct SqueezingParameters {
  /// 2S var_perp_min / |<S>|^2; NaN when the mean spin vanishes.
  double xi2_wineland = 0.0;
  /// var_perp_min / (S/2).
  double xi2_kitagawa = 0.0;
  bool wineland_defined = true;
  std::string diagnostic;
};

/// S_x, S_y, S_z as sparse (tridiagonal / diagonal) matrices in the Dicke basis.
struct SpinOperators {
  Eigen::SparseMatrix<Complex> sx, sy, sz;
};
SpinOperators spin_operators(int two_s);

/// Binomial amplitudes A(S,M) of the S_x = +S coherent state, N_a = 2S.
CollectiveState css_x_polarized(int n_atoms, int max_atoms = kMaxAtoms);

/// Coherent spin state pointing along (theta, phi) on the Bloch sphere.
CollectiveState coherent_spin_state(int two_s, double theta, double phi);

/// Dicke state |S,M>.
CollectiveState dicke_state(int two_s, double m);

SpinMoments moments(const CollectiveState& state);
SpinMoments moments(const MixedCollectiveState& state);

SqueezingParameters squeezing_parameters(const SpinMoments& m, double spin);
template <typename State>
SqueezingParameters squeezing_parameters(const State& state) {
  return squeezing_parameters(moments(state), state.spin());
}

struct HusimiGrid {
  Eigen::VectorXd theta;  ///< n_theta points on [0, pi]
  Eigen::VectorXd phi;    ///< n_phi points on [0, 2 pi)
  Eigen::MatrixXd q;      ///< q(i, j) = Q(theta_i, phi_j)
};

/// Q(theta, phi) = |<CSS(theta, phi)|psi>|^2 on a regular grid.
HusimiGrid husimi_q(const CollectiveState& state, int n_theta, int n_phi);

/// Integral of Q with measure (2S+1)/(4 pi) sin(theta) dtheta dphi; 1 for a normalized state.
double husimi_normalization(const HusimiGrid& grid, int two_s);

}  // namespace fwm
