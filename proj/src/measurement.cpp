#include "fwm/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace fwm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_inputs(double strength, double eta) {
  if (!(strength >= 0.0)) throw std::invalid_argument("measurement strength C must be non-negative");
  if (!(eta > 0.0) || eta > 1.0) throw std::invalid_argument("detection efficiency must lie in (0, 1]");
}

// log of Poisson(n; lambda) with Poisson(0; 0) = 1.
double log_poisson(int n, double lambda) {
  if (lambda == 0.0) return n == 0 ? 0.0 : kNegInf;
  return -lambda + n * std::log(lambda) - std::lgamma(n + 1.0);
}

// (i sgn)^n for sgn = +-1.
Complex i_power(int n, int sgn) {
  static const Complex table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  int k = n % 4;
  if (sgn < 0) k = (4 - k) % 4;
  return table[k];
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Eigen::VectorXcd signal_mode_amplitudes(int two_s, double strength) {
  Eigen::VectorXcd alpha(two_s + 1);
  for (int k = 0; k <= two_s; ++k) alpha(k) = Complex(0.0, -strength * (k - 0.5 * two_s));
  return alpha;
}

int default_photon_cutoff(double strength, double spin) {
  const double cs = strength * spin;
  return static_cast<int>(std::ceil(cs * cs) + 10.0 * std::ceil(cs) + 20.0);
}

Eigen::VectorXd photon_distribution(const CollectiveState& prior, double strength, std::optional<int> n_max,
                                    double eta) {
  check_inputs(strength, eta);
  const double effective = strength * std::sqrt(eta);
  const int cutoff = n_max.value_or(default_photon_cutoff(effective, prior.spin()));
  if (cutoff < 0) throw std::invalid_argument("photon cutoff must be non-negative");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(cutoff + 1);
  const Eigen::VectorXd w = prior.weights();
  for (Eigen::Index k = 0; k < prior.dim(); ++k) {
    if (w(k) == 0.0) continue;
    const double cm = effective * prior.m_of(k);
    const double lambda = cm * cm;
    // Terms beyond 12 standard deviations are far below double resolution.
    const double reach = 12.0 * std::sqrt(lambda) + 30.0;
    const int lo = std::max(0, static_cast<int>(std::floor(lambda - reach)));
    const int hi = std::min(cutoff, static_cast<int>(std::ceil(lambda + reach)));
    for (int n = lo; n <= hi; ++n) p(n) += w(k) * std::exp(log_poisson(n, lambda));
  }
  return p;
}

double outcome_probability(const CollectiveState& prior, double strength, int n, double eta) {
  check_inputs(strength, eta);
  if (n < 0) throw std::invalid_argument("photon number must be non-negative");
  const Eigen::VectorXd w = prior.weights();
  double total = 0.0;
  for (Eigen::Index k = 0; k < prior.dim(); ++k) {
    const double cm = strength * prior.m_of(k);
    total += w(k) * std::exp(log_poisson(n, eta * cm * cm));
  }
  return total;
}

CollectiveState collapse_ideal(const CollectiveState& prior, double strength, int n) {
  check_inputs(strength, 1.0);
  if (n < 0) throw std::invalid_argument("photon number must be non-negative");
  const Eigen::Index dim = prior.dim();
  Eigen::VectorXd log_mag(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double a = std::abs(prior.amplitudes()(k));
    const double cm = std::abs(strength * prior.m_of(k));
    double lm = a > 0.0 ? std::log(a) : kNegInf;
    // (C M)^0 = 1 even at M = 0.
    if (n > 0) lm += cm > 0.0 ? n * std::log(cm) : kNegInf;
    log_mag(k) = lm - 0.5 * cm * cm;
  }
  const double top = log_mag.maxCoeff();
  if (!std::isfinite(top)) throw std::domain_error("measurement outcome has zero probability");
  Eigen::VectorXcd amp(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (!std::isfinite(log_mag(k))) {
      amp(k) = 0.0;
      continue;
    }
    const double m = prior.m_of(k);
    const Complex phase = std::polar(1.0, std::arg(prior.amplitudes()(k))) * i_power(n, m < 0.0 ? -1 : 1);
    amp(k) = std::exp(log_mag(k) - top) * phase;
  }
  return {prior.two_s(), amp};
}

MixedCollectiveState collapse_lossy(const CollectiveState& prior, double strength, int n, double eta) {
  check_inputs(strength, eta);
  if (n < 0) throw std::invalid_argument("photon number must be non-negative");
  if (eta == 1.0) return MixedCollectiveState::from_pure(collapse_ideal(prior, strength, n));

  const Eigen::Index dim = prior.dim();
  const double c2 = strength * strength;
  Eigen::VectorXd log_a(dim), log_m(dim), m(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double a = std::abs(prior.amplitudes()(k));
    m(k) = prior.m_of(k);
    log_a(k) = a > 0.0 ? std::log(a) : kNegInf;
    log_m(k) = m(k) != 0.0 ? std::log(std::abs(m(k))) : kNegInf;
  }
  auto log_entry = [&](Eigen::Index i, Eigen::Index j) {
    double v = log_a(i) + log_a(j) - 0.5 * eta * c2 * (m(i) * m(i) + m(j) * m(j)) -
               0.5 * (1.0 - eta) * c2 * (m(i) - m(j)) * (m(i) - m(j));
    if (n > 0) v += c2 > 0.0 ? n * (std::log(eta * c2) + log_m(i) + log_m(j)) : kNegInf;
    return v;
  };
  // |rho_ij| <= sqrt(rho_ii rho_jj), so the diagonal carries the largest entry.
  double top = kNegInf;
  for (Eigen::Index k = 0; k < dim; ++k) top = std::max(top, log_entry(k, k));
  if (!std::isfinite(top)) throw std::domain_error("measurement outcome has zero probability");

  Eigen::MatrixXcd rho(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double lv = log_entry(i, j);
      if (!std::isfinite(lv)) {
        rho(i, j) = 0.0;
        continue;
      }
      const double sign = (n % 2 == 1 && m(i) * m(j) < 0.0) ? -1.0 : 1.0;
      const double phase = std::arg(prior.amplitudes()(i)) - std::arg(prior.amplitudes()(j));
      rho(i, j) = sign * std::exp(lv - top) * std::polar(1.0, phase);
    }
  }
  return {prior.two_s(), rho};
}

MeasurementRecord measure(const CollectiveState& prior, double strength, int n, double eta) {
  MeasurementRecord rec{n, outcome_probability(prior, strength, n, eta), strength, eta,
                        Posterior{std::in_place_type<CollectiveState>, prior}};
  if (eta == 1.0) rec.posterior = collapse_ideal(prior, strength, n);
  else rec.posterior = collapse_lossy(prior, strength, n, eta);
  return rec;
}

MeasurementRecord sample_outcome(const CollectiveState& prior, double strength, std::uint64_t seed, double eta) {
  const Eigen::VectorXd p = photon_distribution(prior, strength, std::nullopt, eta);
  std::mt19937_64 rng(seed);
  const double u = uniform01(rng);
  int n = 0;
  double acc = 0.0;
  for (; n < p.size(); ++n) {
    acc += p(n);
    if (u < acc) break;
  }
  // The truncated tail is below 1e-12; a draw landing there takes the last bin with weight.
  if (n == p.size()) {
    n = static_cast<int>(p.size()) - 1;
    while (n > 0 && p(n) == 0.0) --n;
  }
  return measure(prior, strength, n, eta);
}

CatAnalysis cat_analysis(const CollectiveState& posterior) {
  const Eigen::VectorXd w = posterior.weights();
  const Eigen::Index dim = posterior.dim();
  Eigen::Index best_plus = -1, best_minus = -1, best = 0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double m = posterior.m_of(k);
    if (w(k) > w(best)) best = k;
    if (m > 0.0 && (best_plus < 0 || w(k) > w(best_plus))) best_plus = k;
    if (m < 0.0 && (best_minus < 0 || w(k) >= w(best_minus))) best_minus = k;
  }
  CatAnalysis out;
  if (best_plus < 0 || best_minus < 0) {
    out.unimodal = true;
    out.peak_plus = out.peak_minus = posterior.m_of(best);
    return out;
  }
  double valley = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = best_minus + 1; k < best_plus; ++k) valley = std::min(valley, w(k));
  const double lower_peak = std::min(w(best_plus), w(best_minus));
  if (valley >= lower_peak) {
    out.unimodal = true;
    out.peak_plus = out.peak_minus = posterior.m_of(best);
    return out;
  }
  out.peak_plus = posterior.m_of(best_plus);
  out.peak_minus = posterior.m_of(best_minus);
  out.separation = out.peak_plus - out.peak_minus;
  const double mid = 0.5 * (out.peak_plus + out.peak_minus);
  for (Eigen::Index k = 0; k < dim; ++k)
    if (std::abs(posterior.m_of(k) - mid) < 0.25 * out.separation) out.overlap += w(k);
  return out;
}

}  // namespace fwm
