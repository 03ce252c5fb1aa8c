#include "fwm/atom_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fwm {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kAdiabaticWarn = 0.1;

void require_nonzero(double value, const char* name) {
  if (value == 0.0) throw std::domain_error(std::string("singular perturbative expression: ") + name + " = 0");
}

double smooth_step(double x) {
  const double s = std::sin(0.5 * std::numbers::pi * x);
  return s * s;
}

}  // namespace

PulseShape parse_pulse_shape(const std::string& name) {
  if (name == "off") return PulseShape::kOff;
  if (name == "constant") return PulseShape::kConstant;
  if (name == "flat_top") return PulseShape::kFlatTop;
  if (name == "gaussian") return PulseShape::kGaussian;
  throw std::invalid_argument("unknown pulse shape '" + name + "' (expected off, constant, flat_top, gaussian)");
}

std::string to_string(PulseShape shape) {
  switch (shape) {
    case PulseShape::kOff: return "off";
    case PulseShape::kConstant: return "constant";
    case PulseShape::kFlatTop: return "flat_top";
    case PulseShape::kGaussian: return "gaussian";
  }
  return "off";
}

Complex PulseEnvelope::operator()(double t) const {
  if (shape == PulseShape::kOff || t < 0.0 || t > duration) return 0.0;
  switch (shape) {
    case PulseShape::kConstant:
      return amplitude;
    case PulseShape::kFlatTop: {
      if (ramp <= 0.0) return amplitude;
      if (t < ramp) return amplitude * smooth_step(t / ramp);
      if (t > duration - ramp) return amplitude * smooth_step((duration - t) / ramp);
      return amplitude;
    }
    case PulseShape::kGaussian: {
      const double x = (t - 0.5 * duration) / ramp;
      return amplitude * std::exp(-x * x);
    }
    default:
      return 0.0;
  }
}

RabiFrequencies PulseSet::rabi(double t) const {
  return {chi1(t) * std::polar(1.0, k1.dot(position)), chi2(t) * std::polar(1.0, k2.dot(position)),
          chip(t) * std::polar(1.0, kp.dot(position))};
}

double PulseSet::duration() const {
  double t = 0.0;
  for (const PulseEnvelope* p : {&chi1, &chi2, &chip})
    if (p->shape != PulseShape::kOff) t = std::max(t, p->duration);
  return t;
}

double PulseSet::perturbative_ratio() const {
  const double chi = std::max({chi1.peak(), chi2.peak(), chip.peak()});
  const double d = std::min(std::abs(detuning), std::abs(probe_detuning));
  return d > 0.0 ? chi / d : std::numeric_limits<double>::infinity();
}

std::vector<std::string> PulseSet::validity_warnings() const {
  std::vector<std::string> w;
  if (perturbative_ratio() > kAdiabaticWarn)
    w.push_back("chi/Delta = " + std::to_string(perturbative_ratio()) + " exceeds 0.1; perturbative expansion unreliable");
  if (std::abs(raman_detuning) >= std::abs(detuning) || std::abs(raman_detuning) >= std::abs(probe_detuning))
    w.push_back("|delta| is not smaller than |Delta| and |Delta_p|");
  for (const PulseEnvelope* p : {&chi1, &chi2, &chip})
    if (p->shape != PulseShape::kOff && p->duration <= 0.0) w.push_back("pulse duration must be positive");
  return w;
}

AtomState AtomState::ground(double s11, double s22, Complex s12) {
  AtomState s;
  s(1, 1) = s11;
  s(2, 2) = s22;
  s(1, 2) = s12;
  s(2, 1) = std::conj(s12);
  return s;
}

AtomState AtomState::x_polarized() { return ground(0.5, 0.5, -0.5); }

void DecayModel::validate() const {
  if (gamma < 0.0 || gamma_prime < 0.0) throw std::invalid_argument("decay rates must be non-negative");
  if (branch31 < 0.0 || branch31 > 1.0 || branch41 < 0.0 || branch41 > 1.0)
    throw std::invalid_argument("branching fractions must lie in [0, 1]");
}

Eigen::Matrix4cd obe_rhs(const PulseSet& p, const std::optional<DecayModel>& decay, double t,
                         const Eigen::Matrix4cd& sigma) {
  const RabiFrequencies r = p.rabi(t);
  const Complex l1 = r.pump1, l2 = r.pump2, lp = r.probe;
  const Complex l1c = std::conj(l1), l2c = std::conj(l2), lpc = std::conj(lp);
  const double dl = p.detuning, dp = p.probe_detuning, dr = p.raman_detuning;
  auto s = [&sigma](int i, int j) { return sigma(i - 1, j - 1); };

  Complex d11 = -kI * l1 * s(4, 1) + kI * l1c * s(1, 4) - kI * lp * s(3, 1) + kI * lpc * s(1, 3);
  Complex d22 = -kI * l2 * s(4, 2) + kI * l2c * s(2, 4);
  Complex d33 = kI * lp * s(3, 1) - kI * lpc * s(1, 3);
  Complex d44 = kI * l1 * s(4, 1) - kI * l1c * s(1, 4) + kI * l2 * s(4, 2) - kI * l2c * s(2, 4);
  Complex d14 = -kI * dl * s(1, 4) + kI * l1 * (s(1, 1) - s(4, 4)) + kI * l2 * s(1, 2) - kI * lp * s(3, 4);
  Complex d24 = -kI * (dl + dr) * s(2, 4) + kI * l2 * (s(2, 2) - s(4, 4)) + kI * l1 * s(2, 1);
  Complex d13 = -kI * dp * s(1, 3) + kI * lp * (s(1, 1) - s(3, 3)) - kI * l1 * s(4, 3);
  Complex d34 = -kI * (dl - dp) * s(3, 4) + kI * l1 * s(3, 1) + kI * l2 * s(3, 2) - kI * lpc * s(1, 4);
  Complex d23 = -kI * (dp + dr) * s(2, 3) + kI * lp * s(2, 1) - kI * l2 * s(4, 3);
  Complex d12 = kI * dr * s(1, 2) - kI * l1 * s(4, 2) + kI * l2c * s(1, 4) - kI * lp * s(3, 2);

  if (decay) {
    const double g3 = decay->gamma, g4 = decay->gamma_prime;
    d33 -= g3 * s(3, 3);
    d44 -= g4 * s(4, 4);
    d11 += g3 * decay->branch31 * s(3, 3) + g4 * decay->branch41 * s(4, 4);
    d22 += g3 * (1.0 - decay->branch31) * s(3, 3) + g4 * (1.0 - decay->branch41) * s(4, 4);
    d13 -= 0.5 * g3 * s(1, 3);
    d23 -= 0.5 * g3 * s(2, 3);
    d14 -= 0.5 * g4 * s(1, 4);
    d24 -= 0.5 * g4 * s(2, 4);
    d34 -= 0.5 * (g3 + g4) * s(3, 4);
  }

  Eigen::Matrix4cd out;
  out(0, 0) = d11.real();
  out(1, 1) = d22.real();
  out(2, 2) = d33.real();
  out(3, 3) = d44.real();
  const Complex upper[6] = {d12, d13, d14, d23, d24, d34};
  const int rows[6] = {0, 0, 0, 1, 1, 2};
  const int cols[6] = {1, 2, 3, 2, 3, 3};
  for (int k = 0; k < 6; ++k) {
    out(rows[k], cols[k]) = upper[k];
    out(cols[k], rows[k]) = std::conj(upper[k]);
  }
  return out;
}

namespace {

struct RawRun {
  std::vector<double> times;
  std::vector<Eigen::Matrix4cd> states;
};

RawRun run_rk4(const PulseSet& pulses, const Eigen::Matrix4cd& init, const std::optional<DecayModel>& decay,
               double t_end, long steps, long record_every) {
  const double h = t_end / static_cast<double>(steps);
  RawRun out;
  out.times.reserve(steps / record_every + 2);
  out.states.reserve(steps / record_every + 2);
  Eigen::Matrix4cd y = init;
  out.times.push_back(0.0);
  out.states.push_back(y);
  for (long n = 0; n < steps; ++n) {
    const double t = h * static_cast<double>(n);
    const Eigen::Matrix4cd k1 = obe_rhs(pulses, decay, t, y);
    const Eigen::Matrix4cd k2 = obe_rhs(pulses, decay, t + 0.5 * h, y + 0.5 * h * k1);
    const Eigen::Matrix4cd k3 = obe_rhs(pulses, decay, t + 0.5 * h, y + 0.5 * h * k2);
    const Eigen::Matrix4cd k4 = obe_rhs(pulses, decay, t + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((n + 1) % record_every == 0 || n + 1 == steps) {
      out.times.push_back(h * static_cast<double>(n + 1));
      out.states.push_back(y);
    }
  }
  return out;
}

}  // namespace

AtomTrajectory integrate_obe(const PulseSet& pulses, const AtomState& init, const std::optional<DecayModel>& decay,
                             double t_end, double dt, IntegrationOptions options) {
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double fastest = std::max(std::abs(pulses.detuning), std::abs(pulses.probe_detuning));
  if (dt * fastest > 0.1 + 1e-12)
    throw std::invalid_argument("step too large: dt * max(|Delta|, |Delta_p|) = " + std::to_string(dt * fastest) +
                                " > 0.1");
  if (std::abs(init.trace() - 1.0) > 1e-10) throw std::invalid_argument("initial state trace is not 1");
  if (init.hermiticity_error() > 1e-10) throw std::invalid_argument("initial state is not Hermitian");
  if (decay) decay->validate();
  if (options.record_every < 1) throw std::invalid_argument("record_every must be >= 1");

  const long steps = std::max(1L, static_cast<long>(std::ceil(t_end / dt - 1e-9)));
  RawRun coarse = run_rk4(pulses, init.sigma, decay, t_end, steps, options.record_every);

  AtomTrajectory traj;
  traj.times = std::move(coarse.times);
  traj.states.reserve(coarse.states.size());
  for (const auto& m : coarse.states) traj.states.push_back(AtomState{m});

  if (options.estimate_error) {
    // Same record times on the halved grid: record every 2*record_every fine steps.
    RawRun fine = run_rk4(pulses, init.sigma, decay, t_end, 2 * steps, 2L * options.record_every);
    double err = 0.0;
    const std::size_t n = std::min(fine.states.size(), traj.states.size());
    for (std::size_t i = 0; i < n; ++i)
      err = std::max(err, (fine.states[i] - traj.states[i].sigma).cwiseAbs().maxCoeff() / 15.0);
    traj.error_estimate = err;
  }
  return traj;
}

GroundValues GroundValues::from(const AtomState& s) { return {s(1, 1).real(), s(2, 2).real(), s(1, 2)}; }

FirstOrderCoherences first_order_coherences(const PulseSet& p, double t, const GroundValues& g) {
  require_nonzero(p.detuning, "Delta");
  require_nonzero(p.probe_detuning, "Delta_p");
  const RabiFrequencies r = p.rabi(t);
  FirstOrderCoherences out;
  out.s14 = (r.pump1 * g.s11 + r.pump2 * g.s12) / p.detuning;
  out.s24 = (r.pump2 * g.s22 + r.pump1 * g.s21()) / p.detuning;
  out.s13 = r.probe * g.s11 / p.probe_detuning;
  out.s23 = r.probe * g.s21() / p.probe_detuning;
  out.warnings = p.validity_warnings();
  return out;
}

PopulationRates ground_population_rate(const PulseSet& p, double t, const GroundValues& g) {
  require_nonzero(p.detuning, "Delta");
  const RabiFrequencies r = p.rabi(t);
  const Complex rate =
      kI * (std::conj(r.pump1) * r.pump2 * g.s12 - r.pump1 * std::conj(r.pump2) * g.s21()) / p.detuning;
  return {rate.real(), -rate.real()};
}

SecondOrderSources second_order_sources(const PulseSet& p, double t, const GroundValues& g) {
  require_nonzero(p.detuning, "Delta");
  require_nonzero(p.probe_detuning, "Delta_p");
  require_nonzero(p.raman_detuning, "delta");
  const RabiFrequencies r = p.rabi(t);
  SecondOrderSources out;
  out.s34 = std::conj(r.probe) * (r.pump1 * g.s11 + r.pump2 * g.s12) / (p.detuning * p.probe_detuning);
  // Adiabatic solution of the sigma12 equation: i delta s12 + i L1 L2* (s11 - s22)/Delta = 0.
  out.s12 = g.s12 - r.pump1 * std::conj(r.pump2) * (g.s11 - g.s22) / (p.detuning * p.raman_detuning);
  return out;
}

Sigma23Expansion perturbative_sigma23(const PulseSet& p, double t, const GroundValues& g) {
  require_nonzero(p.detuning, "Delta");
  require_nonzero(p.probe_detuning, "Delta_p");
  require_nonzero(p.raman_detuning, "delta");
  const RabiFrequencies r = p.rabi(t);
  const double dl = p.detuning, dp = p.probe_detuning, dr = p.raman_detuning;
  const Complex raman = std::conj(r.pump1) * r.pump2 * r.probe;
  Sigma23Expansion out;
  out.terms[0] = r.probe * g.s21() / dp;
  out.terms[1] = -raman * (g.s11 - g.s22) / (dl * dp * dr);
  out.terms[2] = -raman * g.s11 / (dl * dp * dp);
  out.terms[3] = -std::norm(r.pump2) * r.probe * g.s21() / (dl * dp * dp);
  out.full = out.terms[0] + out.terms[1] + out.terms[2] + out.terms[3];
  out.phase_matched = out.terms[1];
  out.warnings = p.validity_warnings();
  if (std::abs(dr / dp) >= kAdiabaticWarn)
    out.warnings.push_back("delta/Delta_p >= 0.1; dropping the suppressed phase-matched term is not justified");
  return out;
}

double dark_state_balance(double chi1, double chi2, double chip, double detuning, double probe_detuning, double gamma,
                          double gamma_prime) {
  require_nonzero(detuning, "Delta");
  require_nonzero(probe_detuning, "Delta_p");
  return gamma_prime * (chi2 * chi2 - chi1 * chi1) / (detuning * detuning) -
         gamma * chip * chip / (probe_detuning * probe_detuning);
}

double balanced_pump2(double chi1, double chip, double detuning, double probe_detuning, double gamma,
                      double gamma_prime) {
  require_nonzero(detuning, "Delta");
  require_nonzero(probe_detuning, "Delta_p");
  if (gamma_prime <= 0.0) throw std::domain_error("balance needs gamma' > 0");
  const double ratio = detuning / probe_detuning;
  return std::sqrt(chi1 * chi1 + gamma * chip * chip * ratio * ratio / gamma_prime);
}

SteadyCoherence steady_coherence(double chi1, double chi2) {
  if (chi2 == 0.0) throw std::domain_error("steady coherence needs chi2 != 0");
  SteadyCoherence out;
  out.value = -0.5 * chi1 / chi2;
  out.flagged = std::abs(out.value) > 0.5;
  return out;
}

}  // namespace fwm
