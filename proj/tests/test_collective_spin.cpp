#include "fwm/collective_spin.hpp"
#include "fwm/measurement.hpp"
#include "fwm/oracle.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace fwm;
using doctest::Approx;

TEST_CASE("css amplitudes for one and two atoms") {
  const CollectiveState one = css_x_polarized(1);
  CHECK(one.dim() == 2);
  CHECK(one.amplitudes()(0).real() == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(one.amplitudes()(1).real() == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  const CollectiveState two = css_x_polarized(2);
  CHECK(two.amplitudes()(0).real() == Approx(0.5).epsilon(1e-14));
  CHECK(two.amplitudes()(1).real() == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(two.amplitudes()(2).real() == Approx(0.5).epsilon(1e-14));
}

TEST_CASE("css matches factorial evaluation") {
  for (int n : {1, 2, 3, 7, 20, 40}) {
    const Eigen::VectorXd exact = oracle::css_factorial(n);
    const CollectiveState css = css_x_polarized(n);
    CHECK((css.amplitudes().real() - exact).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(css.amplitudes().imag().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("css normalized up to the atom limit and rejects bad sizes") {
  for (int n : {1, 5, 100, 1000, 10000}) CHECK(std::abs(css_x_polarized(n).weights().sum() - 1.0) < 1e-12);
  CHECK_THROWS_AS(css_x_polarized(0), std::invalid_argument);
  CHECK_THROWS_AS(css_x_polarized(10001), std::invalid_argument);
  CHECK_THROWS_AS(css_x_polarized(50, 20), std::invalid_argument);
}

TEST_CASE("moments of the x-polarized css") {
  for (int n : {1, 2, 10, 100}) {
    const SpinMoments m = moments(css_x_polarized(n));
    CAPTURE(n);
    CHECK(m.mean_x == Approx(0.5 * n).epsilon(1e-12));
    CHECK(std::abs(m.mean_y) < 1e-12);
    CHECK(std::abs(m.mean_z) < 1e-12);
    CHECK(m.var_z == Approx(n / 4.0).epsilon(1e-12));
    CHECK(m.var_perp_min == Approx(n / 4.0).epsilon(1e-10));
    CHECK(m.mean().norm() <= 0.5 * n + 1e-12);
  }
}

TEST_CASE("var_z brute force over binomial weights") {
  for (int n : {1, 2, 10, 50}) {
    const Eigen::VectorXd a = oracle::css_factorial(n);
    double m2 = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) m2 += a(k) * a(k) * std::pow(k - 0.5 * n, 2);
    CHECK(moments(css_x_polarized(n)).var_z == Approx(m2).epsilon(1e-12));
  }
}

TEST_CASE("dicke top state") {
  const CollectiveState top = dicke_state(6, 3.0);
  const SpinMoments m = moments(top);
  CHECK(m.mean_z == Approx(3.0));
  CHECK(std::abs(m.var_z) < 1e-14);
  CHECK(m.var_perp_min == Approx(1.5).epsilon(1e-12));
  const SqueezingParameters sq = squeezing_parameters(top);
  CHECK(sq.xi2_wineland == Approx(1.0).epsilon(1e-12));
  CHECK(sq.xi2_kitagawa == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("squeezing parameters of a css are one") {
  for (int n : {1, 4, 50, 500}) {
    const SqueezingParameters sq = squeezing_parameters(css_x_polarized(n));
    CHECK(sq.xi2_wineland == Approx(1.0).epsilon(1e-10));
    CHECK(sq.xi2_kitagawa == Approx(1.0).epsilon(1e-10));
  }
  const SqueezingParameters tilted = squeezing_parameters(coherent_spin_state(30, 1.1, 0.4));
  CHECK(tilted.xi2_wineland == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("n_m = 0 posterior is squeezed") {
  for (double c : {0.05, 0.2, 1.0}) {
    const CollectiveState post = collapse_ideal(css_x_polarized(40), c, 0);
    CHECK(squeezing_parameters(post).xi2_wineland < 1.0);
  }
}

TEST_CASE("zero mean spin flags wineland") {
  const CollectiveState cat = collapse_ideal(css_x_polarized(2), 1.0, 1);  // (|-1> - |1>)/sqrt2 up to phase
  const SpinMoments m = moments(cat);
  CHECK(m.zero_mean_spin);
  const SqueezingParameters sq = squeezing_parameters(m, 1.0);
  CHECK_FALSE(sq.wineland_defined);
  CHECK(std::isnan(sq.xi2_wineland));
  CHECK_FALSE(sq.diagnostic.empty());
}

TEST_CASE("parity gives zero mean_z") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXcd amp(11);
  for (int k = 0; k <= 5; ++k) {
    const double mag = u(rng);
    amp(5 + k) = std::polar(mag, 6.0 * u(rng));
    amp(5 - k) = std::polar(mag, 6.0 * u(rng));
  }
  CHECK(std::abs(moments(CollectiveState(10, amp)).mean_z) < 1e-13);
}

TEST_CASE("mixed state moments agree with pure projector") {
  const CollectiveState psi = collapse_ideal(css_x_polarized(12), 0.4, 2);
  const MixedCollectiveState rho = MixedCollectiveState::from_pure(psi);
  const SpinMoments a = moments(psi), b = moments(rho);
  CHECK(a.mean_x == Approx(b.mean_x).epsilon(1e-12));
  CHECK(a.var_z == Approx(b.var_z).epsilon(1e-12));
  CHECK(a.var_perp_min == Approx(b.var_perp_min).epsilon(1e-12));
  CHECK(rho.purity() == Approx(1.0).epsilon(1e-12));
  CHECK(rho.min_eigenvalue() > -1e-12);
}

TEST_CASE("state constructors normalize and validate") {
  Eigen::VectorXcd v(3);
  v << 1.0, 2.0, Complex(0.0, 2.0);
  const CollectiveState s(2, v);
  CHECK(std::abs(s.weights().sum() - 1.0) < 1e-12);
  CHECK_THROWS(CollectiveState(3, v));
  CHECK_THROWS(CollectiveState(2, Eigen::VectorXcd::Zero(3)));
  Eigen::MatrixXcd bad(2, 2);
  bad << 0.5, 0.3, 0.1, 0.5;
  CHECK_THROWS(MixedCollectiveState(1, bad));
  CHECK_THROWS_AS(s.index_of(0.5), std::out_of_range);
}

TEST_CASE("husimi of x css peaks on the x axis") {
  const HusimiGrid g = husimi_q(css_x_polarized(20), 41, 80);
  Eigen::Index i, j;
  g.q.maxCoeff(&i, &j);
  CHECK(g.theta(i) == Approx(std::numbers::pi / 2).epsilon(1e-12));
  CHECK(g.phi(j) == Approx(0.0));
  CHECK(g.q.maxCoeff() == Approx(1.0).epsilon(1e-12));
  CHECK(g.q.minCoeff() >= 0.0);
}

TEST_CASE("husimi of the top dicke state at the pole") {
  const HusimiGrid g = husimi_q(dicke_state(8, 4.0), 21, 16);
  for (Eigen::Index j = 0; j < g.phi.size(); ++j) CHECK(g.q(0, j) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("husimi integrates to one") {
  for (int n : {1, 6, 30}) {
    const HusimiGrid g = husimi_q(css_x_polarized(n), 181, 120);
    CHECK(husimi_normalization(g, n) == Approx(1.0).epsilon(1e-3));
  }
  const HusimiGrid gc = husimi_q(collapse_ideal(css_x_polarized(30), 0.3, 3), 181, 120);
  CHECK(husimi_normalization(gc, 30) == Approx(1.0).epsilon(1e-3));
}

TEST_CASE("husimi of a cat is mirror symmetric") {
  // theta -> pi - theta maps M -> -M; on the phi = 0, pi meridian the phases drop out.
  const HusimiGrid g = husimi_q(collapse_ideal(css_x_polarized(40), 0.1, 16), 61, 36);
  const Eigen::Index nt = g.theta.size();
  for (Eigen::Index i = 0; i < nt; ++i)
    for (Eigen::Index j : {Eigen::Index{0}, Eigen::Index{18}}) CHECK(std::abs(g.q(i, j) - g.q(nt - 1 - i, j)) < 1e-12);
  // Two separated maxima along phi = 0.
  Eigen::Index top;
  g.q.col(0).head(nt / 2).maxCoeff(&top);
  CHECK(top > 0);
  CHECK(g.q(top, 0) > 2.0 * g.q(nt / 2, 0));
}

TEST_CASE("husimi rejects an empty grid") { CHECK_THROWS(husimi_q(css_x_polarized(2), 0, 0)); }
