#include "fwm/signal_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fwm {

namespace {

constexpr Complex kI{0.0, 1.0};

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre nodes by Newton iteration on P_n.
GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

template <typename F>
auto integrate(const GaussRule& rule, double a, double b, F&& f) {
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  decltype(f(a)) acc{};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return acc * half;
}

Eigen::Vector3d direction(double angle) { return {std::sin(angle), 0.0, std::cos(angle)}; }

}  // namespace

void Geometry::validate() const {
  if (!(area > 0.0) || !(length > 0.0) || !(density > 0.0))
    throw std::invalid_argument("geometry needs positive area, length and density");
}

long Geometry::atom_number() const { return std::lround(density * area * length); }

bool Geometry::atom_number_rounded() const {
  const double n = density * area * length;
  return std::abs(n - std::round(n)) > 1e-6 * std::max(1.0, n);
}

PhaseMatch phase_match(const Eigen::Vector3d& k1, const Eigen::Vector3d& k2, const Eigen::Vector3d& kp, double omega1,
                       double omega2, double omega_p, double length, double c) {
  PhaseMatch out;
  out.omega_s = omega_p - (omega1 - omega2);
  if (!(out.omega_s > 0.0)) throw std::invalid_argument("signal frequency Omega_s must be positive");
  out.k_s = kp - (k1 - k2);
  out.residual = std::abs(out.k_s.norm() - out.omega_s / c) * length;
  out.transverse_residual = out.k_s.head<2>().norm() * length;
  out.flagged = out.residual > kPhaseSlipTolerance;
  return out;
}

PhaseMatchAngles tune_phase_matching(double omega1, double omega2, double omega_p, double pump1_angle, double c) {
  const double omega_s = omega_p - (omega1 - omega2);
  if (!(omega_s > 0.0)) throw std::invalid_argument("signal frequency Omega_s must be positive");
  // k_p = k_s + k1 - k2 must have length Omega_p / c; scan the pump-2 angle for a sign change.
  const Eigen::Vector3d fixed = omega1 * direction(pump1_angle) + omega_s * Eigen::Vector3d::UnitZ();
  auto mismatch = [&](double a2) { return (fixed - omega2 * direction(a2)).norm() - omega_p; };

  const int scan = 20000;
  double lo = 0.0, hi = 0.0;
  bool found = false;
  // Search outward from the pump-1 angle so the nearest (small-angle) solution wins.
  for (int i = 1; i <= scan && !found; ++i) {
    for (double sign : {1.0, -1.0}) {
      const double a = pump1_angle + sign * std::numbers::pi * (i - 1) / scan;
      const double b = pump1_angle + sign * std::numbers::pi * i / scan;
      if (mismatch(a) * mismatch(b) <= 0.0) {
        lo = a;
        hi = b;
        found = true;
        break;
      }
    }
  }
  if (!found) throw std::domain_error("no pump-2 angle achieves phase matching");
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mismatch(lo) * mismatch(mid) <= 0.0) hi = mid;
    else lo = mid;
  }
  PhaseMatchAngles out;
  out.pump1 = pump1_angle;
  out.pump2 = 0.5 * (lo + hi);
  const Eigen::Vector3d kp_dir = fixed - omega2 * direction(out.pump2);
  out.probe = std::atan2(kp_dir.x(), kp_dir.z());
  out.k1 = omega1 / c * direction(out.pump1);
  out.k2 = omega2 / c * direction(out.pump2);
  out.kp = omega_p / c * direction(out.probe);
  return out;
}

Complex f_envelope(const PulseSet& p, double t) {
  if (p.detuning == 0.0 || p.probe_detuning == 0.0 || p.raman_detuning == 0.0)
    throw std::domain_error("f(t) is singular at zero detuning");
  return std::conj(p.chi1(t)) * p.chi2(t) * p.chip(t) / (p.detuning * p.probe_detuning * p.raman_detuning);
}

double signal_field_normalization(double omega_s, const Geometry& g, const PhysicalConstants& k) {
  return std::sqrt(k.hbar * omega_s / (2.0 * k.epsilon0 * g.area * g.length));
}

double coupling_C(double d23, double omega_s, const Geometry& g, std::span<const double> times,
                  std::span<const Complex> f, const PhysicalConstants& k) {
  if (times.empty() || times.size() != f.size()) throw std::invalid_argument("coupling_C needs matching, non-empty samples");
  g.validate();
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    integral += 0.5 * (times[i + 1] - times[i]) * (std::norm(f[i]) + std::norm(f[i + 1]));
  // The single-mode normalization sqrt(A L) is restored so C is dimensionless.
  const double field = signal_field_normalization(omega_s, g, k) * std::sqrt(g.area * g.length);
  const double prefactor = 4.0 * std::numbers::pi * d23 * field / (k.hbar * std::sqrt(g.area) * std::sqrt(k.c));
  return std::abs(prefactor) * std::sqrt(integral);
}

CouplingParams compute_coupling(const PulseSet& pulses, const Geometry& geometry, double d23, int n_samples,
                                const PhysicalConstants& k) {
  if (n_samples < 2) throw std::invalid_argument("need at least two f(t) samples");
  geometry.validate();
  CouplingParams out;
  out.d23 = d23;
  out.omega_s = pulses.omega_p - (pulses.omega1 - pulses.omega2);
  if (!(out.omega_s > 0.0)) throw std::invalid_argument("signal frequency Omega_s must be positive");
  out.k_s = out.omega_s / k.c;
  out.field_norm = signal_field_normalization(out.omega_s, geometry, k);
  const double duration = pulses.duration();
  if (!(duration > 0.0)) throw std::invalid_argument("pulse duration T must be positive");
  out.times.resize(n_samples);
  out.f_samples.resize(n_samples);
  out.k_samples.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const double t = duration * i / (n_samples - 1);
    out.times[i] = t;
    out.f_samples[i] = f_envelope(pulses, t);
    out.k_samples[i] = k.hbar * out.k_s * d23 * out.f_samples[i] / (2.0 * k.epsilon0);
  }
  out.strength = coupling_C(d23, out.omega_s, geometry, out.times, out.f_samples, k);
  return out;
}

Complex output_field(Complex input, Complex coupling_k, double area, double sz) {
  return input - kI * (2.0 * coupling_k / area) * sz;
}

Eigen::VectorXd slice_averages(const std::function<double(double)>& profile, double length, int slices,
                               int quadrature_points) {
  const GaussRule rule = gauss_legendre(quadrature_points);
  const double dz = length / slices;
  Eigen::VectorXd avg(slices);
  for (int j = 0; j < slices; ++j) avg(j) = integrate(rule, j * dz, (j + 1) * dz, profile) / dz;
  return avg;
}

double collective_sz(const Eigen::VectorXd& slice_average, double atom_number) {
  return 0.5 * atom_number * slice_average.mean();
}

PropagationResult propagate_numeric(const PropagationProblem& problem, const Geometry& geometry,
                                    const PropagationGrid& grid, double c) {
  geometry.validate();
  if (grid.slices < 8 || grid.quadrature_points < 1) throw std::invalid_argument("propagation grid too coarse");
  if (!problem.population_difference || !problem.coupling) throw std::invalid_argument("profile and K(t) are required");

  const double length = geometry.length;
  const double dz = length / grid.slices;
  const double transit = length / c;
  const GaussRule rule = gauss_legendre(grid.quadrature_points);

  PropagationResult out;
  out.slice_average = slice_averages(problem.population_difference, length, grid.slices, grid.quadrature_points);
  if (grid.pulse_duration > 0.0 && c * grid.pulse_duration / length <= 10.0)
    out.warnings.push_back("cT/L <= 10: long-pulse approximation not satisfied");

  out.times = grid.times;
  out.field.reserve(grid.times.size());
  for (double t : grid.times) {
    // Characteristic through (L, t) started at z0 at time t0, t0 + z0/c = t - L/c + z0/c.
    const double t_entry = t - transit;
    double z0 = 0.0;
    Complex field;
    if (t_entry >= 0.0) {
      field = problem.input_field ? problem.input_field(t_entry) : Complex{};
    } else {
      z0 = length - c * t;
      field = problem.initial_field ? problem.initial_field(z0) : Complex{};
    }
    auto k_along = [&](double z) { return problem.coupling(t_entry + z / c); };
    const int first = std::min(grid.slices - 1, static_cast<int>(std::floor(z0 / dz)));
    Complex source{};
    for (int j = std::max(first, 0); j < grid.slices; ++j) {
      const double a = std::max(z0, j * dz);
      const double b = (j + 1) * dz;
      if (b <= a) continue;
      source += out.slice_average(j) * integrate(rule, a, b, k_along);
    }
    field -= kI * geometry.density * source;
    out.field.push_back(field);
  }
  return out;
}

double intensity(const CollectiveState& state, Complex coupling_k, double area) {
  const SpinMoments m = moments(state);
  const double sz2 = m.var_z + m.mean_z * m.mean_z;
  return 4.0 * std::norm(coupling_k) / (area * area) * sz2;
}

}  // namespace fwm
