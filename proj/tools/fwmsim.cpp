#include "fwm/measurement.hpp"
#include "fwm/oracle.hpp"
#include "fwm/runner.hpp"
#include "fwm/scenario.hpp"
#include "fwm/signal_field.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace {

using fwm::Complex;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

// key=value arguments of the oracle command.
class OracleArgs {
 public:
  explicit OracleArgs(const std::vector<std::string>& raw) {
    for (const std::string& a : raw) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + a + "'");
      values_[a.substr(0, eq)] = a.substr(eq + 1);
    }
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) {
      if (!fallback) throw std::invalid_argument("missing argument " + key + "=...");
      return *fallback;
    }
    const std::string& v = it->second;
    const auto slash = v.find('/');
    if (slash != std::string::npos) return std::stod(v.substr(0, slash)) / std::stod(v.substr(slash + 1));
    return std::stod(v);
  }

  int two_s(const std::string& key) {
    const double s = number(key);
    const double twice = 2.0 * s;
    if (std::abs(twice - std::round(twice)) > 1e-12) throw std::invalid_argument(key + " must be a multiple of 1/2");
    return static_cast<int>(std::lround(twice));
  }

  void finish() const {
    for (const auto& kv : values_)
      if (!used_.count(kv.first)) throw std::invalid_argument("unknown argument '" + kv.first + "'");
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

std::string oracle_fock(OracleArgs& args) {
  const int two_s = args.two_s("S");
  const double c = args.number("C");
  const int cutoff = static_cast<int>(args.number("cutoff", fwm::oracle::kMaxPhotonCutoff));
  const int n_max = static_cast<int>(args.number("n_max", 5));
  args.finish();
  if (two_s < 1 || two_s > fwm::oracle::kMaxTwoS) throw std::invalid_argument("S must lie in [1/2, 4]");
  const fwm::CollectiveState prior = fwm::css_x_polarized(two_s);
  const Eigen::MatrixXcd joint = fwm::oracle::fock_evolve(prior.amplitudes(), c, cutoff);
  std::ostringstream os;
  os << "M,n,re,im,abs\n";
  for (Eigen::Index k = 0; k < joint.rows(); ++k)
    for (int n = 0; n <= std::min<int>(n_max, cutoff); ++n) {
      const Complex z = joint(k, n);
      os << num(prior.m_of(k)) << ',' << n << ',' << num(z.real()) << ',' << num(z.imag()) << ',' << num(std::abs(z))
         << '\n';
    }
  return os.str();
}

std::string oracle_css(OracleArgs& args) {
  const int n_atoms = static_cast<int>(args.number("N_a"));
  args.finish();
  if (n_atoms < 1 || n_atoms > fwm::oracle::kMaxTwoS) throw std::invalid_argument("N_a must lie in [1, 8]");
  const Eigen::VectorXd exact = fwm::oracle::css_factorial(n_atoms);
  const fwm::CollectiveState css = fwm::css_x_polarized(n_atoms);
  std::ostringstream os;
  os << "M,A_factorial,A_library,abs_diff\n";
  for (Eigen::Index k = 0; k < exact.size(); ++k) {
    const double lib = css.amplitudes()(k).real();
    os << num(css.m_of(k)) << ',' << num(exact(k)) << ',' << num(lib) << ',' << num(std::abs(lib - exact(k))) << '\n';
  }
  return os.str();
}

std::string oracle_propagate(const std::string& profile, OracleArgs& args) {
  if (profile != "uniform-profile") throw std::invalid_argument("propagate supports 'uniform-profile' only");
  const double s = args.number("s", 1.0);
  const double k = args.number("K", 1.0);
  const double density = args.number("density", 1.0);
  const double length = args.number("length", 1.0);
  const double e0 = args.number("E0", 0.0);
  args.finish();
  // Scaled units with c = 1; sample at t = 2 L, after the transit time.
  const fwm::Geometry g{1.0, length, density};
  fwm::PropagationProblem problem;
  problem.population_difference = [s](double) { return s; };
  problem.input_field = [e0](double) { return Complex(e0); };
  problem.coupling = [k](double) { return Complex(k); };
  fwm::PropagationGrid grid;
  grid.times = {2.0 * length};
  const fwm::PropagationResult numeric = fwm::propagate_numeric(problem, g, grid, 1.0);
  const Complex closed = fwm::oracle::uniform_profile_exit_field(e0, k, density, s, length);
  const Complex field = numeric.field.front();
  std::ostringstream os;
  os << "quantity,re,im\n"
     << "closed_form," << num(closed.real()) << ',' << num(closed.imag()) << '\n'
     << "numeric," << num(field.real()) << ',' << num(field.imag()) << '\n'
     << "abs_diff," << num(std::abs(field - closed)) << ",0\n";
  return os.str();
}

std::string oracle_beam_splitter(OracleArgs& args) {
  const int two_s = args.two_s("S");
  const double c = args.number("C");
  const int n = static_cast<int>(args.number("n", 0));
  const double eta = args.number("eta", 0.5);
  const int cutoff = static_cast<int>(args.number("cutoff", 30));
  args.finish();
  if (two_s < 1 || two_s > 4) throw std::invalid_argument("beam-splitter oracle supports S <= 2");
  const fwm::CollectiveState prior = fwm::css_x_polarized(two_s);
  const Eigen::MatrixXcd brute = fwm::oracle::beam_splitter_posterior(prior.amplitudes(), c, n, eta, cutoff);
  const Eigen::MatrixXcd lib = fwm::collapse_lossy(prior, c, n, eta).rho();
  std::ostringstream os;
  os << "M,M_prime,re_oracle,im_oracle,re_library,im_library\n";
  for (Eigen::Index i = 0; i < brute.rows(); ++i)
    for (Eigen::Index j = 0; j < brute.cols(); ++j)
      os << num(prior.m_of(i)) << ',' << num(prior.m_of(j)) << ',' << num(brute(i, j).real()) << ','
         << num(brute(i, j).imag()) << ',' << num(lib(i, j).real()) << ',' << num(lib(i, j).imag()) << '\n';
  return os.str();
}

int cmd_validate(const std::string& path) {
  const fwm::LoadedScenario loaded = fwm::load_scenario(path);
  const fwm::Scenario& s = loaded.scenario;
  const fwm::Derived d = fwm::derive(s);
  std::cout << "config: " << path << "\nconfig_sha256: " << loaded.hash << '\n';
  if (s.n_atoms) std::cout << "N_a: " << *s.n_atoms << '\n';
  if (d.geometry_atoms) std::cout << "geometry N_a (n_a A L): " << *d.geometry_atoms << '\n';
  if (d.strength) std::cout << "C: " << num(*d.strength) << '\n';
  if (d.phase) std::cout << "phase mismatch (rad): " << num(d.phase->residual) << '\n';
  if (s.has_pulses) std::cout << "chi/Delta: " << num(d.perturbative_ratio) << '\n';
  for (const std::string& w : loaded.warnings) std::cerr << "warning: " << w << '\n';
  for (const std::string& w : d.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "valid\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional spin-squeezing and cat-state simulator"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int threads = 0;

  CLI::App* run = app.add_subcommand("run", "Execute a scenario and write report.json and CSV tables");
  run->add_option("config", config, "Scenario file")->required();
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out-dir", out_dir, "Output directory");
  run->add_option("--threads", threads, "Worker threads for sweeps (0 = all cores)");

  CLI::App* validate = app.add_subcommand("validate", "Parse a scenario and print derived quantities");
  validate->add_option("config", config, "Scenario file")->required();

  std::string sub;
  std::vector<std::string> oracle_args;
  CLI::App* oracle = app.add_subcommand("oracle", "Brute-force reference outputs (css, fock-evolve, propagate, beam-splitter)");
  oracle->add_option("sub", sub, "Oracle name")->required();
  oracle->add_option("args", oracle_args, "key=value arguments");
  oracle->add_option("--out-dir", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(config);
    if (*run) {
      const fwm::LoadedScenario loaded = fwm::load_scenario(config);
      fwm::RunOptions opts;
      opts.seed = seed;
      opts.out_dir = out_dir;
      opts.threads = threads;
      const fwm::RunSummary summary = fwm::run_scenario(loaded, opts);
      for (const std::string& w : summary.warnings) std::cerr << "warning: " << w << '\n';
      for (const auto& f : summary.files) std::cout << f.string() << '\n';
      return 0;
    }
    if (*oracle) {
      std::string body;
      std::string key = sub;
      if (sub == "propagate") {
        if (oracle_args.empty()) throw std::invalid_argument("propagate needs a profile name");
        const std::string profile = oracle_args.front();
        oracle_args.erase(oracle_args.begin());
        OracleArgs args(oracle_args);
        body = oracle_propagate(profile, args);
      } else {
        OracleArgs args(oracle_args);
        if (sub == "css") body = oracle_css(args);
        else if (sub == "fock-evolve") body = oracle_fock(args);
        else if (sub == "beam-splitter") body = oracle_beam_splitter(args);
        else throw std::invalid_argument("unknown oracle '" + sub + "'");
      }
      std::string signature = sub;
      for (const std::string& a : oracle_args) signature += " " + a;
      std::replace(key.begin(), key.end(), '-', '_');
      const std::filesystem::path path = std::filesystem::path(out_dir) / ("oracle_" + key + ".csv");
      std::filesystem::create_directories(out_dir);
      std::ofstream(path) << fwm::csv_header(fwm::sha256_hex(signature), 0, "oracle") << body;
      std::cout << body;
      return 0;
    }
  } catch (const fwm::ConfigError& e) {
    std::cerr << e.format(config) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
