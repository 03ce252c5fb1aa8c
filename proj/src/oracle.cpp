#include "fwm/oracle.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace fwm::oracle {

namespace {

// Truncated annihilation operator on photon numbers 0..cutoff.
Eigen::MatrixXd annihilation(int cutoff) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Eigen::VectorXd sz_diagonal(int two_s) {
  Eigen::VectorXd m(two_s + 1);
  for (int k = 0; k <= two_s; ++k) m(k) = k - 0.5 * two_s;
  return m;
}

// exp[theta (a^dag b - a b^dag)] with cos^2 theta = eta on two modes, index na * fd + nb.
// Cached per (eta, cutoff).
Eigen::MatrixXcd beam_splitter(double eta, int cutoff) {
  static std::mutex mutex;
  static std::map<std::pair<double, int>, Eigen::MatrixXcd> cache;
  const std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(eta, cutoff);
  if (const auto it = cache.find(key); it != cache.end()) return it->second;

  const Eigen::Index fd = cutoff + 1;
  const Eigen::MatrixXd a = annihilation(cutoff);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(fd, fd);
  Eigen::MatrixXd a_sig(fd * fd, fd * fd), a_env(fd * fd, fd * fd);
  for (Eigen::Index i = 0; i < fd; ++i)
    for (Eigen::Index j = 0; j < fd; ++j) {
      a_sig.block(i * fd, j * fd, fd, fd) = a(i, j) * id;
      a_env.block(i * fd, j * fd, fd, fd) = id(i, j) * a;
    }
  const double theta = std::acos(std::sqrt(eta));
  const Eigen::MatrixXd gen = theta * (a_sig.transpose() * a_env - a_sig * a_env.transpose());
  return cache.emplace(key, gen.exp().cast<Complex>()).first->second;
}

void check_sizes(Eigen::Index atom_dim, int cutoff) {
  if (atom_dim < 2 || atom_dim > kMaxTwoS + 1) throw std::invalid_argument("oracle supports 1/2 <= S <= 4 only");
  if (cutoff < 1 || cutoff > kMaxPhotonCutoff) throw std::invalid_argument("oracle photon cutoff must be in [1, 64]");
}

}  // namespace

Eigen::VectorXd css_factorial(int n_atoms) {
  if (n_atoms < 1 || n_atoms > 60) throw std::invalid_argument("css_factorial supports 1 <= N_a <= 60");
  auto factorial = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  Eigen::VectorXd a(n_atoms + 1);
  for (int k = 0; k <= n_atoms; ++k)
    a(k) = std::sqrt(factorial(n_atoms) / (factorial(k) * factorial(n_atoms - k))) / std::pow(2.0, 0.5 * n_atoms);
  return a;
}

Eigen::MatrixXcd fock_evolve(const Eigen::VectorXcd& atoms, double strength, int cutoff) {
  check_sizes(atoms.size(), cutoff);
  const int two_s = static_cast<int>(atoms.size()) - 1;
  const Eigen::MatrixXd a = annihilation(cutoff);
  const Eigen::MatrixXd quadrature = a + a.transpose();
  const Eigen::MatrixXd sz = sz_diagonal(two_s).asDiagonal();

  // Kronecker product atoms (x) photons, index k * (cutoff + 1) + n.
  const Eigen::Index fd = cutoff + 1, dim = atoms.size() * fd;
  Eigen::MatrixXcd generator = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index k = 0; k < atoms.size(); ++k)
    generator.block(k * fd, k * fd, fd, fd) = Complex(0.0, -strength * sz(k, k)) * quadrature.cast<Complex>();
  const Eigen::MatrixXcd u = generator.exp();

  Eigen::VectorXcd initial = Eigen::VectorXcd::Zero(dim);
  for (Eigen::Index k = 0; k < atoms.size(); ++k) initial(k * fd) = atoms(k);
  const Eigen::VectorXcd final_state = u * initial;

  Eigen::MatrixXcd joint(atoms.size(), fd);
  for (Eigen::Index k = 0; k < atoms.size(); ++k)
    for (Eigen::Index n = 0; n < fd; ++n) joint(k, n) = final_state(k * fd + n);
  return joint;
}

Projection project_photons(const Eigen::MatrixXcd& joint, int n) {
  if (n < 0 || n >= joint.cols()) throw std::invalid_argument("photon number outside the truncated space");
  Projection out;
  const Eigen::VectorXcd column = joint.col(n);
  out.probability = column.squaredNorm();
  if (out.probability > 0.0) out.atoms = column / std::sqrt(out.probability);
  return out;
}

Eigen::MatrixXcd beam_splitter_posterior(const Eigen::VectorXcd& atoms, double strength, int n, double eta,
                                         int cutoff) {
  check_sizes(atoms.size(), cutoff);
  if (!(eta > 0.0) || eta > 1.0) throw std::invalid_argument("eta must lie in (0, 1]");
  if (n > cutoff) throw std::invalid_argument("photon number outside the truncated space");
  const int two_s = static_cast<int>(atoms.size()) - 1;
  const Eigen::VectorXd m = sz_diagonal(two_s);
  const Eigen::Index fd = cutoff + 1;
  const Eigen::MatrixXd a = annihilation(cutoff);
  const Eigen::MatrixXcd bs = beam_splitter(eta, cutoff);

  // Per Dicke component: displace the signal mode from vacuum, then split.
  std::vector<Eigen::VectorXcd> branches(atoms.size());
  const Eigen::MatrixXcd quadrature = (a + a.transpose()).cast<Complex>();
  for (Eigen::Index k = 0; k < atoms.size(); ++k) {
    const Eigen::MatrixXcd disp = (Complex(0.0, -strength * m(k)) * quadrature).exp();
    Eigen::VectorXcd two_mode = Eigen::VectorXcd::Zero(fd * fd);
    for (Eigen::Index na = 0; na < fd; ++na) two_mode(na * fd) = disp(na, 0);
    branches[k] = atoms(k) * (bs * two_mode);
  }

  // Project the signal mode on |n>, trace the environment.
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(atoms.size(), atoms.size());
  for (Eigen::Index i = 0; i < atoms.size(); ++i)
    for (Eigen::Index j = 0; j < atoms.size(); ++j) {
      Complex acc = 0.0;
      for (Eigen::Index nb = 0; nb < fd; ++nb) acc += branches[i](n * fd + nb) * std::conj(branches[j](n * fd + nb));
      rho(i, j) = acc;
    }
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) throw std::domain_error("outcome has zero probability");
  return rho / tr;
}

Complex uniform_profile_exit_field(Complex input, Complex coupling_k, double density, double s, double length) {
  return input - Complex(0.0, 1.0) * density * coupling_k * s * length;
}

Eigen::Matrix4cd hamiltonian_rhs(const PulseSet& pulses, double t, const Eigen::Matrix4cd& sigma) {
  const RabiFrequencies r = pulses.rabi(t);
  Eigen::Matrix4cd h = Eigen::Matrix4cd::Zero();
  h(1, 1) = -pulses.raman_detuning;
  h(2, 2) = pulses.probe_detuning;
  h(3, 3) = pulses.detuning;
  h(3, 0) = -r.pump1;
  h(3, 1) = -r.pump2;
  h(2, 0) = -r.probe;
  h(0, 3) = std::conj(h(3, 0));
  h(1, 3) = std::conj(h(3, 1));
  h(0, 2) = std::conj(h(2, 0));
  const Eigen::Matrix4cd rho = sigma.transpose();
  const Eigen::Matrix4cd rho_dot = Complex(0.0, -1.0) * (h * rho - rho * h);
  return rho_dot.transpose();
}

}  // namespace fwm::oracle
