#include "fwm/collective_spin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fwm {

namespace {

constexpr double kNormTol = 1e-12;

// k * log(y) with the 0 * log(0) = 0 convention.
double xlogy(double k, double y) {
  if (k == 0.0) return 0.0;
  if (y <= 0.0) return -std::numeric_limits<double>::infinity();
  return k * std::log(y);
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// exp(v - max v), so the largest entry is exactly 1.
Eigen::VectorXd exp_shifted(const Eigen::VectorXd& log_values) {
  const double top = log_values.maxCoeff();
  return (log_values.array() - top).exp().matrix();
}

void check_atoms(int n_atoms, int max_atoms) {
  if (n_atoms < 1) throw std::invalid_argument("N_a must be at least 1");
  if (n_atoms > max_atoms)
    throw std::invalid_argument("N_a = " + std::to_string(n_atoms) + " exceeds the configured maximum " +
                                std::to_string(max_atoms));
}

double min_orthogonal_variance(const Eigen::Matrix3d& cov, const Eigen::Vector3d& direction) {
  // Any unit vector not parallel to `direction` seeds the orthogonal frame.
  Eigen::Vector3d seed = std::abs(direction.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  Eigen::Vector3d e1 = (seed - seed.dot(direction) * direction).normalized();
  Eigen::Vector3d e2 = direction.cross(e1);
  Eigen::Matrix<double, 3, 2> frame;
  frame << e1, e2;
  Eigen::Matrix2d projected = frame.transpose() * cov * frame;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(projected, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

SpinMoments finish_moments(const Eigen::Vector3d& mean, const Eigen::Matrix3d& second, double spin) {
  SpinMoments out;
  out.mean_x = mean.x();
  out.mean_y = mean.y();
  out.mean_z = mean.z();
  out.covariance = second - mean * mean.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  out.var_z = std::max(0.0, out.covariance(2, 2));

  const double length = mean.norm();
  if (length <= 1e-10 * std::max(1.0, spin)) {
    out.zero_mean_spin = true;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(out.covariance, Eigen::EigenvaluesOnly);
    out.var_perp_min = std::max(0.0, es.eigenvalues()(0));
  } else {
    out.var_perp_min = std::max(0.0, min_orthogonal_variance(out.covariance, mean / length));
  }
  return out;
}

}  // namespace

CollectiveState::CollectiveState(int two_s, Eigen::VectorXcd amplitudes)
    : two_s_(two_s), amplitudes_(std::move(amplitudes)) {
  if (two_s_ < 0) throw std::invalid_argument("2S must be non-negative");
  if (amplitudes_.size() != two_s_ + 1)
    throw std::invalid_argument("amplitude vector length must be 2S+1");
  const double norm = amplitudes_.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw std::invalid_argument("state has zero or non-finite norm");
  amplitudes_ /= norm;
}

Eigen::Index CollectiveState::index_of(double m) const {
  const double k = m + spin();
  const auto idx = static_cast<Eigen::Index>(std::llround(k));
  if (std::abs(k - static_cast<double>(idx)) > 1e-9 || idx < 0 || idx > two_s_)
    throw std::out_of_range("M is not a valid magnetic quantum number for this S");
  return idx;
}

MixedCollectiveState::MixedCollectiveState(int two_s, Eigen::MatrixXcd rho) : two_s_(two_s), rho_(std::move(rho)) {
  if (rho_.rows() != two_s_ + 1 || rho_.cols() != two_s_ + 1)
    throw std::invalid_argument("density matrix must be (2S+1)x(2S+1)");
  const double scale = std::max(rho_.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kNormTol * scale)
    throw std::invalid_argument("density matrix is not Hermitian");
  rho_ = 0.5 * (rho_ + rho_.adjoint()).eval();
  const double tr = rho_.trace().real();
  if (!(tr > 0.0)) throw std::invalid_argument("density matrix has non-positive trace");
  rho_ /= tr;
}

MixedCollectiveState MixedCollectiveState::from_pure(const CollectiveState& psi) {
  return {psi.two_s(), psi.amplitudes() * psi.amplitudes().adjoint()};
}

double MixedCollectiveState::purity() const { return (rho_ * rho_).trace().real(); }

double MixedCollectiveState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

SpinOperators spin_operators(int two_s) {
  const Eigen::Index n = two_s + 1;
  const double s = 0.5 * two_s;
  using Triplet = Eigen::Triplet<Complex>;
  std::vector<Triplet> tx, ty, tz;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double m = static_cast<double>(k) - s;
    tz.emplace_back(k, k, m);
    if (k + 1 < n) {
      // <M+1|S+|M> = sqrt(S(S+1) - M(M+1))
      const double up = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
      tx.emplace_back(k + 1, k, 0.5 * up);
      tx.emplace_back(k, k + 1, 0.5 * up);
      ty.emplace_back(k + 1, k, Complex(0.0, -0.5 * up));
      ty.emplace_back(k, k + 1, Complex(0.0, 0.5 * up));
    }
  }
  SpinOperators ops;
  ops.sx.resize(n, n);
  ops.sy.resize(n, n);
  ops.sz.resize(n, n);
  ops.sx.setFromTriplets(tx.begin(), tx.end());
  ops.sy.setFromTriplets(ty.begin(), ty.end());
  ops.sz.setFromTriplets(tz.begin(), tz.end());
  return ops;
}

CollectiveState css_x_polarized(int n_atoms, int max_atoms) {
  check_atoms(n_atoms, max_atoms);
  Eigen::VectorXd log_amp(n_atoms + 1);
  for (int k = 0; k <= n_atoms; ++k) log_amp(k) = 0.5 * log_binomial(n_atoms, k);
  Eigen::VectorXd amp = exp_shifted(log_amp);
  amp /= amp.norm();
  return {n_atoms, amp.cast<Complex>()};
}

CollectiveState coherent_spin_state(int two_s, double theta, double phi) {
  const double s = 0.5 * two_s;
  const double c = std::cos(0.5 * theta);
  const double sn = std::sin(0.5 * theta);
  Eigen::VectorXd log_mag(two_s + 1);
  for (int k = 0; k <= two_s; ++k) {
    const double m = k - s;
    log_mag(k) = 0.5 * log_binomial(two_s, k) + xlogy(s + m, std::abs(c)) + xlogy(s - m, std::abs(sn));
  }
  Eigen::VectorXd mag = exp_shifted(log_mag);
  Eigen::VectorXcd amp(two_s + 1);
  for (int k = 0; k <= two_s; ++k) {
    const double m = k - s;
    // Sign of negative cos/sin factors raised to their integer powers.
    double sign = 1.0;
    if (c < 0.0 && std::llround(s + m) % 2 != 0) sign = -sign;
    if (sn < 0.0 && std::llround(s - m) % 2 != 0) sign = -sign;
    amp(k) = sign * mag(k) * std::polar(1.0, (s - m) * phi);
  }
  return {two_s, amp};
}

CollectiveState dicke_state(int two_s, double m) {
  CollectiveState out(two_s, Eigen::VectorXcd::Ones(two_s + 1));
  const Eigen::Index k = out.index_of(m);
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(two_s + 1);
  amp(k) = 1.0;
  return {two_s, amp};
}

SpinMoments moments(const CollectiveState& state) {
  const SpinOperators ops = spin_operators(state.two_s());
  const Eigen::VectorXcd& v = state.amplitudes();
  const Eigen::VectorXcd applied[3] = {ops.sx * v, ops.sy * v, ops.sz * v};
  Eigen::Vector3d mean;
  Eigen::Matrix3d second;
  for (int i = 0; i < 3; ++i) {
    mean(i) = v.dot(applied[i]).real();
    for (int j = 0; j < 3; ++j) second(i, j) = applied[i].dot(applied[j]).real();
  }
  return finish_moments(mean, second, state.spin());
}

SpinMoments moments(const MixedCollectiveState& state) {
  const SpinOperators ops = spin_operators(state.two_s());
  const Eigen::SparseMatrix<Complex>* op[3] = {&ops.sx, &ops.sy, &ops.sz};
  const Eigen::MatrixXcd& rho = state.rho();
  Eigen::Vector3d mean;
  Eigen::Matrix3d second;
  for (int j = 0; j < 3; ++j) {
    // B = S_j rho; tr(rho S_i S_j) = tr(B S_i) = sum_ab B_ab (S_i)_ba
    const Eigen::MatrixXcd b = (*op[j]) * rho;
    mean(j) = b.trace().real();
    for (int i = 0; i < 3; ++i) {
      const Eigen::SparseMatrix<Complex> si_t = op[i]->transpose();
      second(i, j) = si_t.cwiseProduct(b).sum().real();
    }
  }
  return finish_moments(mean, second, state.spin());
}

SqueezingParameters squeezing_parameters(const SpinMoments& m, double spin) {
  SqueezingParameters out;
  if (spin <= 0.0) throw std::invalid_argument("squeezing parameters need S > 0");
  out.xi2_kitagawa = m.var_perp_min / (0.5 * spin);
  const double length2 = m.mean().squaredNorm();
  if (m.zero_mean_spin || length2 == 0.0) {
    out.wineland_defined = false;
    out.xi2_wineland = std::numeric_limits<double>::quiet_NaN();
    out.diagnostic = "mean spin vanishes; Wineland parameter undefined";
  } else {
    out.xi2_wineland = 2.0 * spin * m.var_perp_min / length2;
  }
  return out;
}

HusimiGrid husimi_q(const CollectiveState& state, int n_theta, int n_phi) {
  if (n_theta < 2 || n_phi < 1) throw std::invalid_argument("Husimi grid needs n_theta >= 2 and n_phi >= 1");
  const int two_s = state.two_s();
  const double s = state.spin();
  HusimiGrid grid;
  grid.theta = Eigen::VectorXd::LinSpaced(n_theta, 0.0, std::numbers::pi);
  grid.phi.resize(n_phi);
  for (int j = 0; j < n_phi; ++j) grid.phi(j) = 2.0 * std::numbers::pi * j / n_phi;
  grid.q.resize(n_theta, n_phi);

  Eigen::VectorXd log_binom(two_s + 1);
  for (int k = 0; k <= two_s; ++k) log_binom(k) = 0.5 * log_binomial(two_s, k);

  Eigen::VectorXd mag(two_s + 1);
  for (int i = 0; i < n_theta; ++i) {
    const double c = std::cos(0.5 * grid.theta(i));
    const double sn = std::sin(0.5 * grid.theta(i));
    for (int k = 0; k <= two_s; ++k) {
      const double m = k - s;
      // theta in [0, pi] keeps both half-angle factors non-negative.
      mag(k) = std::exp(log_binom(k) + xlogy(s + m, std::max(c, 0.0)) + xlogy(s - m, std::max(sn, 0.0)));
    }
    for (int j = 0; j < n_phi; ++j) {
      Complex overlap = 0.0;
      for (int k = 0; k <= two_s; ++k)
        overlap += mag(k) * std::polar(1.0, -(s - (k - s)) * grid.phi(j)) * state.amplitudes()(k);
      grid.q(i, j) = std::norm(overlap);
    }
  }
  return grid;
}

double husimi_normalization(const HusimiGrid& grid, int two_s) {
  const Eigen::Index nt = grid.theta.size();
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < nt; ++i) {
    const double h = grid.theta(i + 1) - grid.theta(i);
    const double a = grid.q.row(i).mean() * std::sin(grid.theta(i));
    const double b = grid.q.row(i + 1).mean() * std::sin(grid.theta(i + 1));
    total += 0.5 * h * (a + b);
  }
  return (two_s + 1.0) / (4.0 * std::numbers::pi) * 2.0 * std::numbers::pi * total;
}

}  // namespace fwm
