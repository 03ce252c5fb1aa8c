#include "fwm/scenario.hpp"

#include "fwm/collective_spin.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fwm {

ConfigError::ConfigError(const std::string& message, int line, int column)
    : std::runtime_error(message), line_(line), column_(column) {}

std::string ConfigError::format(const std::string& path) const {
  std::ostringstream os;
  os << path;
  if (line_ > 0) os << ':' << line_ << ':' << column_;
  os << ": error: " << what();
  return os.str();
}

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& message) {
  const YAML::Mark m = node.Mark();
  if (m.is_null()) throw ConfigError(message);
  throw ConfigError(message, m.line + 1, m.column + 1);
}

// A mapping whose keys are checked against an allow-list as they are read.
class Table {
 public:
  Table(const YAML::Node& node, std::string name) : node_(node), name_(std::move(name)) {
    if (node_ && !node_.IsMap()) fail(node_, "'" + name_ + "' must be a table");
  }

  bool present() const { return node_ && node_.IsMap(); }
  bool has(const std::string& key) {
    known_.insert(key);
    return present() && node_[key];
  }
  YAML::Node get(const std::string& key) {
    known_.insert(key);
    return present() ? node_[key] : YAML::Node(YAML::NodeType::Undefined);
  }

  template <typename T>
  std::optional<T> optional(const std::string& key) {
    const YAML::Node n = get(key);
    if (!n) return std::nullopt;
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "'" + name_ + "." + key + "' has the wrong type");
    }
  }

  template <typename T>
  T value(const std::string& key, T fallback) {
    return optional<T>(key).value_or(fallback);
  }

  Complex complex(const std::string& key, Complex fallback) {
    const YAML::Node n = get(key);
    if (!n) return fallback;
    try {
      if (n.IsSequence()) {
        if (n.size() != 2) fail(n, "'" + name_ + "." + key + "' must be a number or [re, im]");
        return {n[0].as<double>(), n[1].as<double>()};
      }
      return n.as<double>();
    } catch (const YAML::Exception&) {
      fail(n, "'" + name_ + "." + key + "' must be a number or [re, im]");
    }
  }

  Eigen::Vector3d vector3(const std::string& key) {
    const YAML::Node n = get(key);
    if (!n) return Eigen::Vector3d::Zero();
    if (!n.IsSequence() || n.size() != 3) fail(n, "'" + name_ + "." + key + "' must be a list of 3 numbers");
    try {
      return {n[0].as<double>(), n[1].as<double>(), n[2].as<double>()};
    } catch (const YAML::Exception&) {
      fail(n, "'" + name_ + "." + key + "' must be a list of 3 numbers");
    }
  }

  template <typename T>
  std::optional<std::vector<T>> list(const std::string& key) {
    const YAML::Node n = get(key);
    if (!n) return std::nullopt;
    if (!n.IsSequence()) fail(n, "'" + name_ + "." + key + "' must be a list");
    std::vector<T> out;
    for (const YAML::Node& item : n) {
      try {
        out.push_back(item.as<T>());
      } catch (const YAML::Exception&) {
        fail(item, "'" + name_ + "." + key + "' has an entry of the wrong type");
      }
    }
    if (out.empty()) fail(n, "sweep axis '" + key + "' is empty");
    return out;
  }

  /// Rejects keys that were never queried.
  void finish() const {
    if (!present()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!known_.count(key)) fail(kv.first, "unknown key '" + key + "' in '" + name_ + "'");
    }
  }

  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string name_;
  std::set<std::string> known_;
};

void parse_pulses(Table& t, Scenario& s) {
  PulseShape shape;
  const YAML::Node shape_node = t.get("shape");
  try {
    shape = parse_pulse_shape(t.value<std::string>("shape", "flat_top"));
  } catch (const std::invalid_argument& e) {
    fail(shape_node, e.what());
  }
  const double duration = t.value<double>("duration", 0.0);
  const double ramp = t.value<double>("ramp", 0.0);
  if (!(duration > 0.0)) fail(t.get("duration").IsDefined() ? t.get("duration") : t.node(), "pulse duration must be positive");
  if (ramp < 0.0 || (shape == PulseShape::kFlatTop && 2.0 * ramp > duration))
    fail(t.get("ramp"), "ramp must be non-negative and at most half the duration");
  if (shape == PulseShape::kGaussian && !(ramp > 0.0)) fail(t.node(), "gaussian pulses need a positive ramp (width)");

  auto envelope = [&](const std::string& key) {
    PulseEnvelope e{shape, t.complex(key, 0.0), duration, ramp};
    if (e.amplitude == 0.0) e.shape = PulseShape::kOff;
    return e;
  };
  PulseSet& p = s.pulses;
  p.chi1 = envelope("chi1");
  p.chi2 = envelope("chi2");
  p.chip = envelope("chip");
  p.detuning = t.value<double>("detuning", 1.0);
  p.probe_detuning = t.value<double>("probe_detuning", 1.0);
  p.raman_detuning = t.value<double>("raman_detuning", 0.0);
  p.omega1 = t.value<double>("omega1", 0.0);
  p.omega2 = t.value<double>("omega2", 0.0);
  p.omega_p = t.value<double>("omega_p", 0.0);
  p.k1 = t.vector3("k1");
  p.k2 = t.vector3("k2");
  p.kp = t.vector3("kp");
  p.position = t.vector3("position");
  s.has_pulses = true;
}

Scenario parse_root(const YAML::Node& root, std::vector<std::string>& warnings) {
  if (!root.IsMap()) fail(root, "config must be a table of sections");
  Scenario s;
  Table top(root, "config");

  const YAML::Node mode_node = top.get("mode");
  const std::string mode = top.value<std::string>("mode", "");
  if (mode == "dark_state") s.mode = RunMode::kDarkState;
  else if (mode == "measurement") s.mode = RunMode::kMeasurement;
  else if (mode == "sweep") s.mode = RunMode::kSweep;
  else fail(mode_node ? mode_node : root, "mode must be one of dark_state, measurement, sweep");

  const YAML::Node units_node = top.get("units");
  const std::string units = top.value<std::string>("units", "scaled");
  if (units == "scaled") s.units = Units::kScaled;
  else if (units == "si") s.units = Units::kSI;
  else fail(units_node, "units must be 'scaled' or 'si'");
  s.seed = top.value<std::uint64_t>("seed", 0);

  Table atoms(top.get("atoms"), "atoms");
  s.n_atoms = atoms.optional<int>("n_atoms");
  if (s.n_atoms && (*s.n_atoms < 1 || *s.n_atoms > kMaxAtoms))
    fail(atoms.get("n_atoms"), "atoms.n_atoms must lie in [1, " + std::to_string(kMaxAtoms) + "]");
  if (const YAML::Node init = atoms.get("init")) {
    if (init.IsScalar()) {
      if (init.as<std::string>() != "x_polarized") fail(init, "atoms.init must be 'x_polarized' or a table");
    } else {
      Table it(init, "atoms.init");
      s.atom_init.s11 = it.value<double>("s11", 0.5);
      s.atom_init.s22 = it.value<double>("s22", 0.5);
      s.atom_init.s12 = it.complex("s12", 0.0);
      it.finish();
      if (std::abs(s.atom_init.s11 + s.atom_init.s22 - 1.0) > 1e-12) fail(init, "atoms.init populations must sum to 1");
    }
  }
  atoms.finish();

  Table pulses(top.get("pulses"), "pulses");
  if (pulses.present()) parse_pulses(pulses, s);
  pulses.finish();

  Table decay(top.get("decay"), "decay");
  if (decay.present()) {
    DecayModel d;
    d.gamma = decay.value<double>("gamma", 0.0);
    d.gamma_prime = decay.value<double>("gamma_prime", d.gamma);
    d.branch31 = decay.value<double>("branch31", 0.5);
    d.branch41 = decay.value<double>("branch41", 0.5);
    try {
      d.validate();
    } catch (const std::invalid_argument& e) {
      fail(decay.node(), e.what());
    }
    s.decay = d;
  }
  decay.finish();

  Table integ(top.get("integration"), "integration");
  s.dt = integ.value<double>("dt", 0.0);
  s.record_every = integ.value<int>("record_every", 1);
  s.t_end = integ.value<double>("t_end", 0.0);
  if (s.dt < 0.0 || s.record_every < 1 || s.t_end < 0.0)
    fail(integ.node(), "integration.dt and t_end must be non-negative, record_every at least 1");
  integ.finish();

  Table geom(top.get("geometry"), "geometry");
  if (geom.present()) {
    Geometry g{geom.value<double>("area", 0.0), geom.value<double>("length", 0.0), geom.value<double>("density", 0.0)};
    try {
      g.validate();
    } catch (const std::invalid_argument& e) {
      fail(geom.node(), e.what());
    }
    s.geometry = g;
  }
  geom.finish();

  Table coup(top.get("coupling"), "coupling");
  s.d23 = coup.optional<double>("d23");
  s.coupling_samples = coup.value<int>("samples", 2001);
  s.strength_override = coup.optional<double>("C");
  if (s.strength_override && *s.strength_override < 0.0) fail(coup.get("C"), "coupling.C must be non-negative");
  if (s.coupling_samples < 2) fail(coup.get("samples"), "coupling.samples must be at least 2");
  coup.finish();

  Table meas(top.get("measurement"), "measurement");
  s.eta = meas.value<double>("eta", 1.0);
  if (!(s.eta > 0.0) || s.eta > 1.0) fail(meas.get("eta"), "measurement.eta must lie in (0, 1]");
  const YAML::Node outcome_node = meas.get("outcome");
  const std::string outcome = meas.value<std::string>("outcome", "fixed");
  if (outcome == "fixed") s.outcome = OutcomePolicy::kFixed;
  else if (outcome == "sampled") s.outcome = OutcomePolicy::kSampled;
  else fail(outcome_node, "measurement.outcome must be 'fixed' or 'sampled'");
  s.n_m = meas.value<int>("n_m", 0);
  if (s.n_m < 0) fail(meas.get("n_m"), "measurement.n_m must be non-negative");
  meas.finish();

  Table sweep(top.get("sweep"), "sweep");
  const YAML::Node sweep_node = top.get("sweep");
  if (sweep.present()) {
    s.sweep.strength = sweep.list<double>("C").value_or(std::vector<double>{});
    s.sweep.n_atoms = sweep.list<int>("n_atoms").value_or(std::vector<int>{});
    s.sweep.n_m = sweep.list<int>("n_m").value_or(std::vector<int>{});
    s.sweep.eta = sweep.list<double>("eta").value_or(std::vector<double>{});
    for (double c : s.sweep.strength)
      if (c < 0.0) fail(sweep.get("C"), "sweep.C entries must be non-negative");
    for (int n : s.sweep.n_atoms)
      if (n < 1 || n > kMaxAtoms) fail(sweep.get("n_atoms"), "sweep.n_atoms entries must lie in [1, 10000]");
    for (int n : s.sweep.n_m)
      if (n < 0) fail(sweep.get("n_m"), "sweep.n_m entries must be non-negative");
    for (double e : s.sweep.eta)
      if (!(e > 0.0) || e > 1.0) fail(sweep.get("eta"), "sweep.eta entries must lie in (0, 1]");
  }
  sweep.finish();

  Table out(top.get("output"), "output");
  if (const YAML::Node h = out.get("husimi")) {
    Table ht(h, "output.husimi");
    s.husimi.n_theta = ht.value<int>("n_theta", 0);
    s.husimi.n_phi = ht.value<int>("n_phi", 0);
    ht.finish();
    if (!s.husimi.enabled()) fail(h, "output.husimi needs positive n_theta and n_phi");
  }
  s.full_density_matrix = out.value<bool>("full_density_matrix", false);
  s.write_trajectory = out.value<bool>("trajectory", true);
  out.finish();
  top.finish();

  // Cross-section rules.
  if (s.mode == RunMode::kDarkState && !s.has_pulses) fail(root, "dark_state mode needs a 'pulses' table");
  if (s.mode == RunMode::kSweep) {
    const SweepAxes& a = s.sweep;
    if (!sweep_node || (a.strength.empty() && a.n_atoms.empty() && a.n_m.empty() && a.eta.empty()))
      fail(sweep_node ? sweep_node : root, "sweep mode needs at least one non-empty axis in 'sweep'");
    if (!a.n_m.empty() && s.outcome == OutcomePolicy::kSampled)
      fail(sweep_node, "sweep.n_m conflicts with measurement.outcome = sampled");
  }
  if (s.mode != RunMode::kDarkState) {
    const bool override_given = s.strength_override.has_value() || !s.sweep.strength.empty();
    if (override_given && s.physical_coupling())
      fail(root, "C given directly and physical coupling inputs (geometry/d23) are mutually exclusive");
    if (!override_given && !s.physical_coupling())
      fail(root, "measurement needs either coupling.C (or sweep.C) or physical coupling inputs");
    if (s.physical_coupling()) {
      if (s.units != Units::kSI) fail(root, "physical coupling inputs require units: si");
      if (!s.geometry || !s.d23 || !s.has_pulses)
        fail(root, "physical coupling needs geometry, coupling.d23 and pulses");
      if (!(s.pulses.omega_p - (s.pulses.omega1 - s.pulses.omega2) > 0.0))
        fail(pulses.node() ? pulses.node() : root, "signal frequency omega_p - (omega1 - omega2) must be positive");
    }
    if (!s.n_atoms && s.sweep.n_atoms.empty()) {
      if (!s.geometry) fail(root, "atoms.n_atoms is required without geometry");
      const long n = s.geometry->atom_number();
      if (n < 1 || n > kMaxAtoms)
        fail(root, "geometry gives N_a = " + std::to_string(n) + ", outside [1, 10000]; set atoms.n_atoms");
      if (s.geometry->atom_number_rounded()) warnings.push_back("n_a A L is not an integer; N_a rounded");
      s.n_atoms = static_cast<int>(n);
    }
  }
  if (s.has_pulses) {
    const double fastest = std::max(std::abs(s.pulses.detuning), std::abs(s.pulses.probe_detuning));
    if (s.dt > 0.0 && s.dt * fastest > 0.1)
      fail(integ.node() ? integ.node() : root, "integration.dt * max(|Delta|, |Delta_p|) must not exceed 0.1");
  }
  return s;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

LoadedScenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  LoadedScenario out;
  out.scenario = parse_root(root, out.warnings);
  out.hash = sha256_hex(text);
  return out;
}

LoadedScenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

Derived derive(const Scenario& s) {
  Derived d;
  if (s.has_pulses) {
    d.perturbative_ratio = s.pulses.perturbative_ratio();
    for (const std::string& w : s.pulses.validity_warnings()) d.warnings.push_back(w);
  }
  if (s.geometry) d.geometry_atoms = s.geometry->atom_number();
  if (s.strength_override) d.strength = s.strength_override;
  if (s.physical_coupling() && s.geometry && s.d23 && s.has_pulses) {
    const CouplingParams cp = compute_coupling(s.pulses, *s.geometry, *s.d23, s.coupling_samples);
    d.strength = cp.strength;
  }
  const PulseSet& p = s.pulses;
  const bool have_k = !p.k1.isZero() || !p.k2.isZero() || !p.kp.isZero();
  if (s.has_pulses && have_k && p.omega_p - (p.omega1 - p.omega2) > 0.0) {
    const double length = s.geometry ? s.geometry->length : 0.0;
    const double c = s.units == Units::kSI ? PhysicalConstants{}.c : 1.0;
    d.phase = phase_match(p.k1, p.k2, p.kp, p.omega1, p.omega2, p.omega_p, length, c);
    if (d.phase->flagged)
      d.warnings.push_back("phase-match residual " + std::to_string(d.phase->residual) + " rad exceeds 0.1");
  }
  return d;
}

std::uint64_t point_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace fwm
