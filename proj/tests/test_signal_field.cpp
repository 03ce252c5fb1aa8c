#include "fwm/collective_spin.hpp"
#include "fwm/oracle.hpp"
#include "fwm/signal_field.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace fwm;
using doctest::Approx;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kC = PhysicalConstants{}.c;

PulseSet constant_pulses(double chi, double duration, double delta) {
  PulseSet p;
  p.chi1 = p.chi2 = p.chip = {PulseShape::kConstant, chi, duration, 0.0};
  p.detuning = 1e9;
  p.probe_detuning = 1.2e9;
  p.raman_detuning = delta;
  p.omega1 = kTwoPi * 377.1e12;
  p.omega2 = p.omega1 - kTwoPi * 6.8e9;
  p.omega_p = kTwoPi * 384.2e12;
  return p;
}

}  // namespace

TEST_CASE("degenerate pumps: signal degenerate with the probe") {
  const double wp = kTwoPi * 384e12;
  const Eigen::Vector3d k{0.0, 0.0, 1e7};
  const Eigen::Vector3d kp{0.0, 0.0, wp / kC};
  const PhaseMatch pm = phase_match(k, k, kp, 1e15, 1e15, wp, 0.01);
  CHECK(pm.omega_s == wp);
  CHECK(pm.k_s == kp);
  CHECK(pm.residual == Approx(0.0));
  CHECK_FALSE(pm.flagged);
}

TEST_CASE("copropagating beams with a common pump wave vector slip by omega21 L / c") {
  const double w21 = kTwoPi * 6.8e9, w1 = kTwoPi * 377e12, wp = kTwoPi * 384e12, length = 0.01;
  const Eigen::Vector3d k1{0.0, 0.0, w1 / kC};
  const Eigen::Vector3d kp{0.0, 0.0, wp / kC};
  const PhaseMatch pm = phase_match(k1, k1, kp, w1, w1 - w21, wp, length);
  CHECK(pm.residual == Approx(w21 * length / kC).epsilon(1e-6));
  CHECK(pm.residual == Approx(1.4).epsilon(0.02));
  CHECK(pm.flagged);
}

TEST_CASE("tuned angles put the signal on the axis") {
  const double w1 = kTwoPi * 377.1e12, w2 = w1 - kTwoPi * 6.8e9, wp = kTwoPi * 384.2e12;
  const PhaseMatchAngles a = tune_phase_matching(w1, w2, wp, 0.05);
  const PhaseMatch pm = phase_match(a.k1, a.k2, a.kp, w1, w2, wp, 0.01);
  CHECK(pm.residual < 1e-3);
  CHECK(pm.transverse_residual < 1e-3);
  CHECK(a.k2.norm() == Approx(w2 / kC).epsilon(1e-12));
  CHECK(a.kp.norm() == Approx(wp / kC).epsilon(1e-12));
}

TEST_CASE("non-positive signal frequency rejected") {
  const Eigen::Vector3d z = Eigen::Vector3d::Zero();
  CHECK_THROWS_AS(phase_match(z, z, z, 5.0, 1.0, 3.0, 1.0), std::invalid_argument);
}

TEST_CASE("f envelope") {
  PulseSet p = constant_pulses(2.0, 1.0, 0.5);
  p.detuning = 3.0;
  p.probe_detuning = 4.0;
  CHECK(f_envelope(p, 0.5) == Complex(8.0 / (3.0 * 4.0 * 0.5)));
  PulseSet flipped = p;
  flipped.raman_detuning = -0.5;
  CHECK(f_envelope(flipped, 0.5) == -f_envelope(p, 0.5));
  PulseSet off = p;
  off.chip.shape = PulseShape::kOff;
  CHECK(f_envelope(off, 0.5) == 0.0);
  PulseSet singular = p;
  singular.raman_detuning = 0.0;
  CHECK_THROWS_AS(f_envelope(singular, 0.5), std::domain_error);
}

TEST_CASE("coupling C value and scaling") {
  const Geometry g{1e-8, 0.01, 1e18};
  const double d23 = 2.5e-29;
  const PulseSet p = constant_pulses(1e7, 1e-6, 1e6);
  const CouplingParams cp = compute_coupling(p, g, d23, 2001);
  const PhysicalConstants k;
  const double f = std::pow(1e7, 3) / (1e9 * 1.2e9 * 1e6);
  const double expected = 4.0 * std::numbers::pi * d23 * std::sqrt(k.hbar * cp.omega_s / (2.0 * k.epsilon0)) /
                          (k.hbar * std::sqrt(g.area) * std::sqrt(k.c)) * f * std::sqrt(1e-6);
  CHECK(cp.strength == Approx(expected).epsilon(1e-12));
  CHECK(cp.k_s == Approx(cp.omega_s / k.c).epsilon(1e-12));
  CHECK(std::abs(cp.k_samples[5] - k.hbar * cp.k_s * d23 * cp.f_samples[5] / (2.0 * k.epsilon0)) < 1e-30);

  // Constant f: C proportional to sqrt(T).
  const CouplingParams longer = compute_coupling(constant_pulses(1e7, 4e-6, 1e6), g, d23, 2001);
  CHECK(longer.strength == Approx(2.0 * cp.strength).epsilon(1e-12));
  // f proportional to 1/delta.
  const CouplingParams half = compute_coupling(constant_pulses(1e7, 1e-6, 0.5e6), g, d23, 2001);
  CHECK(half.strength == Approx(2.0 * cp.strength).epsilon(1e-12));
  // Dimensionless: d23 -> 2 d23 with A -> 4 A leaves C unchanged; L and n_a do not enter.
  const Geometry wide{4e-8, 0.05, 3e17};
  CHECK(compute_coupling(p, wide, 2.0 * d23, 2001).strength == Approx(cp.strength).epsilon(1e-12));
}

TEST_CASE("coupling C edge cases") {
  const Geometry g{1e-8, 0.01, 1e18};
  const std::vector<double> t{0.0, 1.0, 2.0};
  const std::vector<Complex> zero(3, 0.0);
  CHECK(coupling_C(1e-29, 1e15, g, t, zero) == 0.0);
  CHECK_THROWS_AS(coupling_C(1e-29, 1e15, g, std::vector<double>{}, std::vector<Complex>{}), std::invalid_argument);
  CHECK_THROWS_AS(coupling_C(1e-29, 1e15, g, t, std::vector<Complex>(2, 1.0)), std::invalid_argument);
}

TEST_CASE("output field is affine in S_z") {
  const Complex e{0.3, -0.2}, k{1.5, 0.7};
  CHECK(output_field(e, k, 2.0, 0.0) == e);
  const Complex d1 = output_field(e, k, 2.0, 3.0) - e;
  const Complex d2 = output_field(e, k, 2.0, 6.0) - e;
  CHECK(std::abs(d2 - 2.0 * d1) < 1e-15);
  CHECK(std::abs(d1 - Complex(0.0, -1.0) * (2.0 * k / 2.0) * 3.0) < 1e-15);
}

TEST_CASE("uniform profile with constant K") {
  const Geometry g{1.0, 2.0, 3.0};
  PropagationProblem pr;
  pr.population_difference = [](double) { return 0.4; };
  pr.input_field = [](double) { return Complex(0.1, 0.2); };
  pr.coupling = [](double) { return Complex(0.5, -0.3); };
  PropagationGrid grid;
  grid.times = {5.0, 10.0};
  const PropagationResult r = propagate_numeric(pr, g, grid, 1.0);
  const Complex expected = oracle::uniform_profile_exit_field(Complex(0.1, 0.2), Complex(0.5, -0.3), 3.0, 0.4, 2.0);
  for (const Complex& e : r.field) CHECK(std::abs(e - expected) < 1e-13);
}

TEST_CASE("zero profile transports the input") {
  const Geometry g{1.0, 3.0, 1.0};
  PropagationProblem pr;
  pr.population_difference = [](double) { return 0.0; };
  pr.input_field = [](double t) { return Complex(std::sin(t), t); };
  pr.coupling = [](double) { return Complex(1.0); };
  PropagationGrid grid;
  grid.times = {3.5, 4.0, 7.25};
  const PropagationResult r = propagate_numeric(pr, g, grid, 1.5);
  for (std::size_t i = 0; i < grid.times.size(); ++i)
    CHECK(std::abs(r.field[i] - pr.input_field(grid.times[i] - 2.0)) < 1e-15);
}

TEST_CASE("transient before the transit time") {
  // Empty medium at t = 0, no input: E(L, t) = -i n_a K s c t for t < L / c.
  const Geometry g{1.0, 1.0, 2.0};
  PropagationProblem pr;
  pr.population_difference = [](double) { return 0.5; };
  pr.coupling = [](double) { return Complex(1.0); };
  PropagationGrid grid;
  grid.times = {0.0, 0.123, 0.5, 0.77, 1.0, 1.5};
  const PropagationResult r = propagate_numeric(pr, g, grid, 1.0);
  for (std::size_t i = 0; i < grid.times.size(); ++i) {
    const double reach = std::min(grid.times[i], 1.0);
    CHECK(std::abs(r.field[i] - Complex(0.0, -2.0 * 0.5 * reach)) < 1e-13);
  }
}

TEST_CASE("long pulse limit reproduces the closed form") {
  const Geometry g{2e-8, 0.01, 5e17};
  const double n_atoms = g.density * g.area * g.length;
  auto profile = [&](double z) { return 0.3 + 0.2 * std::cos(3.0 * z / g.length) - 0.1 * z / g.length; };
  PropagationProblem pr;
  pr.population_difference = profile;
  pr.input_field = [](double) { return Complex(1e-3); };
  pr.coupling = [](double) { return Complex(2e-20, 1e-20); };
  PropagationGrid grid;
  grid.times = {2.0 * g.length / kC, 50.0 * g.length / kC};
  grid.pulse_duration = 100.0 * g.length / kC;
  const PropagationResult r = propagate_numeric(pr, g, grid);
  CHECK(r.warnings.empty());
  const double sz = collective_sz(r.slice_average, n_atoms);
  const Complex closed = output_field(Complex(1e-3), Complex(2e-20, 1e-20), g.area, sz);
  for (const Complex& e : r.field) CHECK(std::abs(e - closed) / std::abs(closed) < 1e-10);
  // Exact integral of the profile.
  const double integral = 0.3 * g.length + 0.2 * g.length / 3.0 * std::sin(3.0) - 0.05 * g.length;
  CHECK(sz == Approx(n_atoms / (2.0 * g.length) * integral).epsilon(1e-12));
}

TEST_CASE("propagation grid checks") {
  const Geometry g{1.0, 1.0, 1.0};
  PropagationProblem pr;
  pr.population_difference = [](double) { return 1.0; };
  pr.coupling = [](double) { return Complex(1.0); };
  PropagationGrid grid;
  grid.times = {2.0};
  grid.slices = 4;
  CHECK_THROWS_AS(propagate_numeric(pr, g, grid, 1.0), std::invalid_argument);
  grid.slices = 64;
  grid.pulse_duration = 5.0;
  CHECK_FALSE(propagate_numeric(pr, g, grid, 1.0).warnings.empty());
}

TEST_CASE("intensity scaling with atom number") {
  const Complex k{2.0, 1.0};
  for (int n : {10, 40}) {
    const double top_ratio = intensity(dicke_state(2 * n, n), k, 1.0) / intensity(dicke_state(n, 0.5 * n), k, 1.0);
    CHECK(top_ratio == Approx(4.0).epsilon(1e-12));
    const double css_ratio = intensity(css_x_polarized(2 * n), k, 1.0) / intensity(css_x_polarized(n), k, 1.0);
    CHECK(css_ratio == Approx(2.0).epsilon(1e-12));
  }
  CHECK(intensity(css_x_polarized(10), 0.0, 1.0) == 0.0);
  CHECK(intensity(css_x_polarized(10), k, 2.0) == Approx(4.0 * 5.0 / 4.0 * 10.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("geometry") {
  const Geometry g{1e-8, 0.01, 1.5e13};
  CHECK(g.atom_number() == 1500);
  CHECK_FALSE(g.atom_number_rounded());
  const Geometry h{1e-8, 0.01, 1.23456e13};
  CHECK(h.atom_number_rounded());
  CHECK_THROWS(Geometry{0.0, 1.0, 1.0}.validate());
}
