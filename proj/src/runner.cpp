#include "fwm/runner.hpp"

#include "fwm/collective_spin.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#ifndef FWM_VERSION
#define FWM_VERSION "0.0.0"
#endif

namespace fwm {

namespace {

using json = nlohmann::ordered_json;

// Empty cell for undefined values (e.g. Wineland xi^2 at zero mean spin).
std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::kDarkState: return "dark_state";
    case RunMode::kMeasurement: return "measurement";
    case RunMode::kSweep: return "sweep";
  }
  return "";
}

void write_file(const std::filesystem::path& path, const std::string& content, RunSummary& summary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  summary.files.push_back(path);
}

json cat_json(const CatAnalysis& c) {
  return {{"peak_plus", c.peak_plus},
          {"peak_minus", c.peak_minus},
          {"separation", c.separation},
          {"overlap", c.overlap},
          {"unimodal", c.unimodal}};
}

json point_json(const PointResult& p, bool with_record, bool full_matrix) {
  json j;
  j["index"] = p.index;
  j["C"] = p.strength;
  j["N_a"] = p.n_atoms;
  j["eta"] = p.eta;
  j["seed"] = p.seed;
  if (!p.error.empty()) {
    j["error"] = p.error;
    return j;
  }
  j["n_m"] = p.record->n_m;
  j["probability"] = p.record->probability;
  j["xi2_wineland"] = p.xi2_wineland;
  j["xi2_kitagawa"] = p.xi2_kitagawa;
  j["var_z"] = p.var_z;
  j["mean_x"] = p.mean_x;
  j["cat"] = cat_json(p.cat);
  if (with_record) j["record"] = to_json(*p.record, full_matrix);
  return j;
}

std::string sweep_csv(const std::vector<PointResult>& points) {
  std::ostringstream os;
  os << "index,C,N_a,n_m,eta,seed,probability,xi2_wineland,xi2_kitagawa,var_z,mean_x,"
        "peak_plus,peak_minus,separation,overlap,unimodal,error\n";
  for (const PointResult& p : points) {
    os << p.index << ',' << num(p.strength) << ',' << p.n_atoms << ',';
    if (p.error.empty()) {
      const CatAnalysis& c = p.cat;
      os << p.record->n_m << ',' << num(p.eta) << ',' << p.seed << ',' << num(p.record->probability) << ','
         << num(p.xi2_wineland) << ',' << num(p.xi2_kitagawa) << ',' << num(p.var_z) << ',' << num(p.mean_x) << ','
         << num(c.peak_plus) << ',' << num(c.peak_minus) << ',' << num(c.separation) << ',' << num(c.overlap) << ','
         << (c.unimodal ? 1 : 0) << ",\n";
    } else {
      std::string msg = p.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      os << ',' << num(p.eta) << ',' << p.seed << ",,,,,,,,,,," << msg << '\n';
    }
  }
  return os.str();
}

std::string husimi_csv(const HusimiGrid& g) {
  std::ostringstream os;
  os << "theta,phi,q\n";
  for (Eigen::Index i = 0; i < g.theta.size(); ++i)
    for (Eigen::Index j = 0; j < g.phi.size(); ++j)
      os << num(g.theta(i)) << ',' << num(g.phi(j)) << ',' << num(g.q(i, j)) << '\n';
  return os.str();
}

std::string trajectory_csv(const AtomTrajectory& traj) {
  std::ostringstream os;
  os << "t";
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j) os << ",re_s" << i << j << ",im_s" << i << j;
  os << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << num(traj.times[k]);
    for (int i = 1; i <= 4; ++i)
      for (int j = 1; j <= 4; ++j) {
        const Complex z = traj.states[k](i, j);
        os << ',' << num(z.real()) << ',' << num(z.imag());
      }
    os << '\n';
  }
  return os.str();
}

std::vector<PointResult> run_points(const std::vector<PointSpec>& specs, int threads) {
  std::vector<PointResult> results(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      results[i] = evaluate_point(specs[i]);
      results[i].index = i;
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(specs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return results;
}

json run_dark_state(const Scenario& s, const std::string& header, const std::filesystem::path& dir,
                    RunSummary& summary) {
  const PulseSet& p = s.pulses;
  const double fastest = std::max(std::abs(p.detuning), std::abs(p.probe_detuning));
  const double dt = s.dt > 0.0 ? s.dt : 0.05 / fastest;
  const double t_end = s.t_end > 0.0 ? s.t_end : p.duration();
  const AtomState init = AtomState::ground(s.atom_init.s11, s.atom_init.s22, s.atom_init.s12);
  const AtomTrajectory traj = integrate_obe(p, init, s.decay, t_end, dt, {s.record_every, true});

  double d11 = 0.0, d22 = 0.0, d12 = 0.0, excited = 0.0, trace_err = 0.0;
  for (const AtomState& st : traj.states) {
    d11 = std::max(d11, std::abs(st(1, 1).real() - init(1, 1).real()));
    d22 = std::max(d22, std::abs(st(2, 2).real() - init(2, 2).real()));
    d12 = std::max(d12, std::abs(st(1, 2) - init(1, 2)));
    excited = std::max(excited, st(3, 3).real() + st(4, 4).real());
    trace_err = std::max(trace_err, std::abs(st.trace() - 1.0));
  }
  const AtomState& last = traj.states.back();
  json j;
  j["t_end"] = t_end;
  j["dt"] = dt;
  j["recorded_samples"] = traj.times.size();
  j["max_drift_s11"] = d11;
  j["max_drift_s22"] = d22;
  j["max_drift_s12"] = d12;
  j["max_excited_population"] = excited;
  j["max_trace_error"] = trace_err;
  j["step_error_estimate"] = traj.error_estimate;
  j["final"] = {{"s11", last(1, 1).real()},
                {"s22", last(2, 2).real()},
                {"s33", last(3, 3).real()},
                {"s44", last(4, 4).real()},
                {"s12", complex_json(last(1, 2))},
                {"s23", complex_json(last(2, 3))}};
  if (s.decay) {
    j["balance_residual"] = dark_state_balance(p.chi1.peak(), p.chi2.peak(), p.chip.peak(), p.detuning,
                                               p.probe_detuning, s.decay->gamma, s.decay->gamma_prime);
  }
  if (p.chi2.peak() > 0.0) {
    const SteadyCoherence sc = steady_coherence(p.chi1.peak(), p.chi2.peak());
    j["steady_coherence"] = {{"value", sc.value}, {"flagged", sc.flagged}};
  }
  if (s.write_trajectory) write_file(dir / "trajectory_atom.csv", header + trajectory_csv(traj), summary);
  return j;
}

}  // namespace

PointResult evaluate_point(const PointSpec& spec) {
  PointResult r;
  r.strength = spec.strength;
  r.n_atoms = spec.n_atoms;
  r.eta = spec.eta;
  r.seed = spec.seed;
  try {
    const CollectiveState prior = css_x_polarized(spec.n_atoms);
    r.record = spec.sampled ? sample_outcome(prior, spec.strength, spec.seed, spec.eta)
                            : measure(prior, spec.strength, spec.n_m, spec.eta);
    const SpinMoments m = std::visit([](const auto& st) { return moments(st); }, r.record->posterior);
    const SqueezingParameters sq = squeezing_parameters(m, prior.spin());
    r.xi2_wineland = sq.xi2_wineland;
    r.xi2_kitagawa = sq.xi2_kitagawa;
    r.var_z = m.var_z;
    r.mean_x = m.mean_x;
    if (const auto* pure = std::get_if<CollectiveState>(&r.record->posterior)) {
      r.cat = cat_analysis(*pure);
    } else {
      const auto& mixed = std::get<MixedCollectiveState>(r.record->posterior);
      const Eigen::VectorXcd w = mixed.rho().diagonal().real().cwiseMax(0.0).cwiseSqrt().cast<Complex>();
      r.cat = cat_analysis(CollectiveState(mixed.two_s(), w));
    }
  } catch (const std::exception& e) {
    r.record.reset();
    r.error = e.what();
  }
  return r;
}

std::vector<PointSpec> expand_sweep(const Scenario& s, double strength, std::uint64_t master_seed) {
  const SweepAxes& a = s.sweep;
  const std::vector<double> cs = a.strength.empty() ? std::vector<double>{strength} : a.strength;
  const std::vector<int> ns = a.n_atoms.empty() ? std::vector<int>{s.n_atoms.value_or(1)} : a.n_atoms;
  const std::vector<int> ms = a.n_m.empty() ? std::vector<int>{s.n_m} : a.n_m;
  const std::vector<double> es = a.eta.empty() ? std::vector<double>{s.eta} : a.eta;
  std::vector<PointSpec> out;
  for (double c : cs)
    for (int n : ns)
      for (int m : ms)
        for (double e : es) {
          const std::uint64_t seed = point_seed(master_seed, out.size());
          out.push_back({c, n, m, e, s.outcome == OutcomePolicy::kSampled, seed});
        }
  return out;
}

json to_json(const MeasurementRecord& rec, bool full_matrix) {
  json j;
  j["n_m"] = rec.n_m;
  j["probability"] = rec.probability;
  j["eta"] = rec.eta;
  j["C"] = rec.strength;
  json post;
  if (const auto* pure = std::get_if<CollectiveState>(&rec.posterior)) {
    post["kind"] = "pure";
    post["two_s"] = pure->two_s();
    json amps = json::array();
    for (Eigen::Index k = 0; k < pure->dim(); ++k) amps.push_back(complex_json(pure->amplitudes()(k)));
    post["amplitudes"] = std::move(amps);
  } else {
    const auto& mixed = std::get<MixedCollectiveState>(rec.posterior);
    post["kind"] = "mixed";
    post["two_s"] = mixed.two_s();
    json diag = json::array();
    for (Eigen::Index k = 0; k < mixed.dim(); ++k) diag.push_back(mixed.rho()(k, k).real());
    post["diagonal"] = std::move(diag);
    if (full_matrix) {
      json rows = json::array();
      for (Eigen::Index i = 0; i < mixed.dim(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < mixed.dim(); ++k) row.push_back(complex_json(mixed.rho()(i, k)));
        rows.push_back(std::move(row));
      }
      post["matrix"] = std::move(rows);
    }
  }
  j["posterior"] = std::move(post);
  return j;
}

std::string csv_header(const std::string& config_hash, std::uint64_t seed, const std::string& kind) {
  std::ostringstream os;
  os << "# fwmsim " << FWM_VERSION << " " << kind << " schema " << kReportSchemaVersion << '\n'
     << "# config_sha256: " << config_hash << '\n'
     << "# seed: " << seed << '\n';
  return os.str();
}

RunSummary run_scenario(const LoadedScenario& loaded, const RunOptions& options) {
  const Scenario& s = loaded.scenario;
  const std::uint64_t seed = options.seed.value_or(s.seed);
  int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(threads, 1);
  std::filesystem::create_directories(options.out_dir);

  RunSummary summary;
  summary.warnings = loaded.warnings;
  const Derived derived = derive(s);
  for (const std::string& w : derived.warnings) summary.warnings.push_back(w);

  json report;
  report["schema"] = "fwmsim-report";
  report["schema_version"] = kReportSchemaVersion;
  report["provenance"] = {{"version", FWM_VERSION},
                          {"config_sha256", loaded.hash},
                          {"seed", seed},
                          {"generated_at", options.timestamp.empty() ? utc_now() : options.timestamp}};
  report["mode"] = mode_name(s.mode);
  json derived_json;
  derived_json["perturbative_ratio"] = derived.perturbative_ratio;
  if (derived.strength) derived_json["C"] = *derived.strength;
  if (derived.geometry_atoms) derived_json["geometry_atom_number"] = *derived.geometry_atoms;
  if (derived.phase) derived_json["phase_mismatch"] = derived.phase->residual;
  report["derived"] = std::move(derived_json);

  const auto header = [&](const std::string& kind) { return csv_header(loaded.hash, seed, kind); };
  if (s.mode == RunMode::kDarkState) {
    report["dark_state"] = run_dark_state(s, header("trajectory"), options.out_dir, summary);
  } else {
    std::vector<PointSpec> specs = expand_sweep(s, derived.strength.value_or(0.0), seed);
    const std::vector<PointResult> points = run_points(specs, threads);
    const bool single = s.mode == RunMode::kMeasurement;
    json arr = json::array();
    for (const PointResult& p : points) {
      arr.push_back(point_json(p, single, s.full_density_matrix));
      if (!p.error.empty()) summary.warnings.push_back("point " + std::to_string(p.index) + ": " + p.error);
    }
    report["points"] = std::move(arr);
    write_file(options.out_dir / "sweep.csv", header("sweep") + sweep_csv(points), summary);

    if (single && points.front().error.empty()) {
      const PointSpec& sp = specs.front();
      const CollectiveState prior = css_x_polarized(sp.n_atoms);
      const Eigen::VectorXd dist = photon_distribution(prior, sp.strength, std::nullopt, sp.eta);
      report["photon_distribution"] = std::vector<double>(dist.data(), dist.data() + dist.size());
      if (s.husimi.enabled()) {
        write_file(options.out_dir / "husimi_prior.csv",
                   header("husimi") + husimi_csv(husimi_q(prior, s.husimi.n_theta, s.husimi.n_phi)), summary);
        if (const auto* pure = std::get_if<CollectiveState>(&points.front().record->posterior))
          write_file(options.out_dir / "husimi_posterior.csv",
                     header("husimi") + husimi_csv(husimi_q(*pure, s.husimi.n_theta, s.husimi.n_phi)), summary);
        else
          summary.warnings.push_back("Husimi output skipped for the mixed posterior");
      }
    } else if (s.husimi.enabled() && !single) {
      summary.warnings.push_back("Husimi output is only written in measurement mode");
    }
  }
  report["warnings"] = summary.warnings;
  write_file(options.out_dir / "report.json", report.dump(2) + "\n", summary);
  summary.report = std::move(report);
  return summary;
}

}  // namespace fwm
