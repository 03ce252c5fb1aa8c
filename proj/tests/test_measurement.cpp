#include "fwm/collective_spin.hpp"
#include "fwm/measurement.hpp"
#include "fwm/oracle.hpp"
#include "fwm/runner.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace fwm;
using doctest::Approx;

namespace {

double poisson(double lambda, int n) {
  return std::exp(-lambda + n * std::log(lambda) - std::lgamma(n + 1.0));
}

}  // namespace

TEST_CASE("photon distribution at zero coupling") {
  const Eigen::VectorXd p = photon_distribution(css_x_polarized(10), 0.0, 5);
  CHECK(p(0) == Approx(1.0).epsilon(1e-15));
  CHECK(p.tail(5).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("photon distribution of a single atom is one poisson") {
  const double c = 1.3;
  const Eigen::VectorXd p = photon_distribution(css_x_polarized(1), c, 30);
  CHECK(p(0) == Approx(std::exp(-c * c / 4.0)).epsilon(1e-14));
  for (int n = 1; n < 10; ++n) CHECK(p(n) == Approx(poisson(c * c / 4.0, n)).epsilon(1e-12));
}

TEST_CASE("photon distribution normalization and mean") {
  for (int n_atoms : {1, 7, 100, 2000})
    for (double c : {0.01, 0.3, 1.0, 2.5}) {
      CAPTURE(n_atoms);
      CAPTURE(c);
      const CollectiveState prior = css_x_polarized(n_atoms);
      const Eigen::VectorXd p = photon_distribution(prior, c);
      CHECK(std::abs(p.sum() - 1.0) < 1e-12);
      double mean = 0.0;
      for (Eigen::Index n = 0; n < p.size(); ++n) mean += n * p(n);
      const double expected = c * c * moments(prior).var_z;  // <M> = 0
      CHECK(std::abs(mean - expected) <= 1e-10 * std::max(1.0, expected));
    }
}

TEST_CASE("outcome probability agrees with the table") {
  const CollectiveState prior = css_x_polarized(20);
  const Eigen::VectorXd p = photon_distribution(prior, 0.7, 40, 0.6);
  for (int n : {0, 3, 11}) CHECK(outcome_probability(prior, 0.7, n, 0.6) == Approx(p(n)).epsilon(1e-13));
  CHECK_THROWS(outcome_probability(prior, 0.7, -1));
  CHECK_THROWS(photon_distribution(prior, 0.7, 10, 1.5));
}

TEST_CASE("two-atom collapse weights") {
  const CollectiveState post = collapse_ideal(css_x_polarized(2), 1.0, 0);
  const double e = std::exp(-1.0);
  const double z = e / 4.0 + 0.5 + e / 4.0;
  CHECK(post.weights()(0) == Approx(e / 4.0 / z).epsilon(1e-14));
  CHECK(post.weights()(1) == Approx(0.5 / z).epsilon(1e-14));
  CHECK(post.weights()(2) == Approx(e / 4.0 / z).epsilon(1e-14));

  const CollectiveState odd = collapse_ideal(css_x_polarized(2), 1.0, 1);
  CHECK(odd.amplitudes()(1) == Complex(0.0));
  CHECK(odd.weights()(0) == Approx(0.5).epsilon(1e-14));

  CHECK_THROWS_AS(collapse_ideal(dicke_state(2, 0.0), 1.0, 1), std::domain_error);
  CHECK_THROWS_AS(collapse_ideal(css_x_polarized(4), 0.0, 2), std::domain_error);
}

TEST_CASE("collapse matches joint evolution and projection") {
  for (int two_s : {1, 2, 3, 4, 5, 6})
    for (double c : {0.1, 1.0, 3.0}) {
      const CollectiveState prior = css_x_polarized(two_s);
      const Eigen::MatrixXcd joint = oracle::fock_evolve(prior.amplitudes(), c);
      for (int n = 0; n <= 5; ++n) {
        CAPTURE(two_s);
        CAPTURE(c);
        CAPTURE(n);
        const oracle::Projection proj = oracle::project_photons(joint, n);
        CHECK(outcome_probability(prior, c, n) == Approx(proj.probability).epsilon(1e-10));
        if (proj.probability < 1e-300) continue;
        const CollectiveState post = collapse_ideal(prior, c, n);
        // Global phase aside, the states coincide.
        CHECK(std::abs(post.amplitudes().dot(proj.atoms)) == Approx(1.0).epsilon(1e-10));
      }
    }
}

TEST_CASE("posterior parity and variance") {
  const CollectiveState prior = css_x_polarized(60);
  for (int n : {0, 1, 2, 5}) {
    const CollectiveState post = collapse_ideal(prior, 0.4, n);
    const Eigen::VectorXd w = post.weights();
    for (Eigen::Index k = 0; k < w.size(); ++k) CHECK(w(k) == Approx(w(w.size() - 1 - k)).epsilon(1e-13));
    CHECK(std::abs(moments(post).mean_z) < 1e-12);
  }
  double previous = moments(prior).var_z;
  for (double c : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    const double v = moments(collapse_ideal(prior, c, 0)).var_z;
    CHECK(v < previous);
    previous = v;
  }
}

TEST_CASE("lossy collapse at unit efficiency is the pure posterior") {
  const CollectiveState prior = css_x_polarized(9);
  const MixedCollectiveState rho = collapse_lossy(prior, 0.6, 2, 1.0);
  const CollectiveState psi = collapse_ideal(prior, 0.6, 2);
  CHECK((rho.rho() - psi.amplitudes() * psi.amplitudes().adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(rho.purity() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lossy collapse matches the beam-splitter model") {
  for (int two_s : {1, 2, 3, 4})
    for (double eta : {0.3, 0.7, 0.95})
      for (int n : {0, 1, 2}) {
        CAPTURE(two_s);
        CAPTURE(eta);
        CAPTURE(n);
        const CollectiveState prior = css_x_polarized(two_s);
        const Eigen::MatrixXcd brute = oracle::beam_splitter_posterior(prior.amplitudes(), 0.8, n, eta);
        const MixedCollectiveState lib = collapse_lossy(prior, 0.8, n, eta);
        CHECK((lib.rho() - brute).cwiseAbs().maxCoeff() < 1e-10);
      }
}

TEST_CASE("lossy posterior is a valid density matrix") {
  const CollectiveState prior = css_x_polarized(30);
  for (double eta : {0.05, 0.5, 0.9})
    for (int n : {0, 2}) {
      const MixedCollectiveState rho = collapse_lossy(prior, 0.5, n, eta);
      CHECK(std::abs(rho.rho().trace() - 1.0) < 1e-12);
      CHECK((rho.rho() - rho.rho().adjoint()).cwiseAbs().maxCoeff() < 1e-14);
      CHECK(rho.min_eigenvalue() > -1e-12);
    }
  // Almost no light reaches the detector: the atoms dephase and purity falls well below one.
  CHECK(collapse_lossy(prior, 1.0, 0, 1e-3).purity() < 0.5);
}

TEST_CASE("measure selects the posterior kind") {
  const CollectiveState prior = css_x_polarized(8);
  const MeasurementRecord pure = measure(prior, 0.5, 1);
  CHECK(std::holds_alternative<CollectiveState>(pure.posterior));
  CHECK(pure.probability == Approx(outcome_probability(prior, 0.5, 1)).epsilon(1e-14));
  const MeasurementRecord mixed = measure(prior, 0.5, 1, 0.8);
  CHECK(std::holds_alternative<MixedCollectiveState>(mixed.posterior));
  CHECK(mixed.eta == 0.8);
}

TEST_CASE("sampling at zero coupling always returns zero") {
  const CollectiveState prior = css_x_polarized(50);
  for (std::uint64_t seed = 0; seed < 50; ++seed) CHECK(sample_outcome(prior, 0.0, seed).n_m == 0);
}

TEST_CASE("sampling is deterministic per seed") {
  const CollectiveState prior = css_x_polarized(100);
  for (std::uint64_t seed : {1ull, 77ull, 123456789ull}) {
    const MeasurementRecord a = sample_outcome(prior, 0.5, seed);
    const MeasurementRecord b = sample_outcome(prior, 0.5, seed);
    CHECK(a.n_m == b.n_m);
    CHECK(a.probability == b.probability);
  }
}

TEST_CASE("sampled histogram follows the photon distribution") {
  const CollectiveState prior = css_x_polarized(40);
  const double c = 0.3;
  const Eigen::VectorXd p = photon_distribution(prior, c, 40);
  const int draws = 100000;
  std::vector<int> counts(p.size(), 0);
  std::mt19937_64 seeds(2024);
  for (int i = 0; i < draws; ++i) {
    const int n = sample_outcome(prior, c, seeds()).n_m;
    REQUIRE(n < p.size());
    ++counts[n];
  }
  for (Eigen::Index n = 0; n < p.size(); ++n) {
    if (p(n) * draws < 5.0) continue;
    const double sigma = std::sqrt(draws * p(n) * (1.0 - p(n)));
    CAPTURE(n);
    CHECK(std::abs(counts[n] - draws * p(n)) < 4.0 * sigma);
  }
}

TEST_CASE("cat analysis of an n = 4 posterior") {
  const CollectiveState post = collapse_ideal(css_x_polarized(100), 0.2, 4);
  const CatAnalysis cat = cat_analysis(post);
  CHECK_FALSE(cat.unimodal);
  CHECK(cat.peak_plus == -cat.peak_minus);
  CHECK(cat.peak_plus > 0.0);
  CHECK(cat.separation == Approx(2.0 * cat.peak_plus));
  // |c_M|^2 maximal near M^2 = n / (C^2 + 1/S).
  CHECK(cat.peak_plus == Approx(std::sqrt(4.0 / (0.04 + 1.0 / 50.0))).epsilon(0.1));
  const Eigen::VectorXd w = post.weights();
  for (Eigen::Index k = 0; k < w.size(); ++k) CHECK(w(k) == Approx(w(w.size() - 1 - k)).epsilon(1e-13));
}

TEST_CASE("cat analysis flags a single peak") {
  const CatAnalysis cat = cat_analysis(collapse_ideal(css_x_polarized(100), 0.2, 0));
  CHECK(cat.unimodal);
  CHECK(cat.separation == 0.0);
}

TEST_CASE("measurement record json") {
  const CollectiveState prior = css_x_polarized(4);
  const auto pure = to_json(measure(prior, 0.5, 2), false);
  CHECK(pure["n_m"] == 2);
  CHECK(pure["C"] == 0.5);
  CHECK(pure["eta"] == 1.0);
  CHECK(pure["probability"].get<double>() == Approx(outcome_probability(prior, 0.5, 2)));
  CHECK(pure["posterior"]["kind"] == "pure");
  CHECK(pure["posterior"]["amplitudes"].size() == 5);
  CHECK(pure["posterior"]["amplitudes"][0].size() == 2);

  const auto mixed = to_json(measure(prior, 0.5, 2, 0.7), false);
  CHECK(mixed["posterior"]["kind"] == "mixed");
  CHECK(mixed["posterior"]["diagonal"].size() == 5);
  CHECK_FALSE(mixed["posterior"].contains("matrix"));
  const auto full = to_json(measure(prior, 0.5, 2, 0.7), true);
  CHECK(full["posterior"]["matrix"].size() == 5);
}
