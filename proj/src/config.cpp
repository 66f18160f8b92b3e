#include "spincat/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "spincat/light_shift.hpp"

namespace spincat {

using nlohmann::json;
using nlohmann::ordered_json;

ConfigError::ConfigError(std::string key, const std::string& message)
    : std::runtime_error("config key '" + key + "': " + message), key_(std::move(key)) {}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Walks one JSON object; every key must be read exactly once or it is reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(join(path_, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(join(path_, key), "must be finite");
    return d;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!j_.contains(key)) {
      seen_.insert(key);
      return std::nullopt;
    }
    return number(key, 0.0);
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(join(path_, key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) throw ConfigError(join(path_, key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(join(path_, key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(join(path_, key), "expected a string");
    return v.get<std::string>();
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(join(path_, it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> number_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(path, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

// Either an explicit list or {start, stop, count} (inclusive, evenly spaced).
std::vector<double> grid(const json& v, const std::string& path) {
  if (v.is_array()) return number_list(v, path);
  Section s(v, path);
  const double start = s.number("start", 0.0);
  const double stop = s.number("stop", 0.0);
  const std::int64_t count = s.integer("count", 0);
  s.finish();
  if (count < 1) throw ConfigError(path + ".count", "must be >= 1");
  if (count > 10'000'000) throw ConfigError(path + ".count", "too large");
  std::vector<double> out;
  for (std::int64_t i = 0; i < count; ++i) {
    out.push_back(count == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return out;
}

void check_grid(const std::vector<double>& g, const std::string& key) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i]) || g[i] < 0.0) throw ConfigError(key, "values must be finite and >= 0");
    if (i > 0 && !(g[i] > g[i - 1])) throw ConfigError(key, "must be strictly increasing");
  }
}

void check_rate(double v, const std::string& key) {
  if (!(v >= 0.0)) throw ConfigError(key, "must be >= 0");
}

}  // namespace

double RunConfig::gamma() const {
  if (zeeman.gamma_mode == "yb173") return constants::yb173_gamma;
  return zeeman.gamma;
}

PulseSpec RunConfig::cat_pulse() const {
  if (control.alpha_v_au && control.alpha_t_au && control.intensity_w_m2) {
    const auto pair = control_rabi_frequencies({0.0, *control.alpha_v_au, *control.alpha_t_au},
                                               FieldAmplitude::from_intensity(*control.intensity_w_m2), spin());
    return {pair[0], pair[1], constants::pi / 2.0};
  }
  const double w1 = constants::two_pi * control.omega1_hz;
  return {w1, control.ratio * w1, constants::pi / 2.0};
}

PulseSpec RunConfig::css_pulse() const {
  const double w1 = constants::two_pi * control.css_omega1_hz;
  return {w1, control.css_ratio * w1, constants::pi / 2.0};
}

double RunConfig::omega_zz() const {
  if (lattice.alpha_t_au && lattice.intensity_w_m2) {
    return lattice_tensor_frequency(*lattice.alpha_t_au, FieldAmplitude::from_intensity(*lattice.intensity_w_m2),
                                    spin());
  }
  return constants::two_pi * lattice.omega_zz_hz;
}

EnsembleModel RunConfig::ensemble_model() const {
  const EnsemblePolicy policy =
      ensemble.policy == "quadrature" ? EnsemblePolicy::quadrature : EnsemblePolicy::monte_carlo;
  if (ensemble.dist == "gaussian") {
    return EnsembleModel::gaussian(1.0, ensemble.rel_sigma, ensemble.n_samples, ensemble.seed, policy);
  }
  if (ensemble.dist == "empirical") return EnsembleModel::empirical(ensemble.samples);
  return EnsembleModel::delta(1.0);
}

std::vector<FringeRecord> simulate_ramsey(const RunConfig& c, std::span<const double> taus, RamseyMode mode) {
  std::vector<FringeRecord> records = ramsey(taus, c.ramsey_config(mode), mode);
  if (c.measurement.n_atoms) {
    const std::uint64_t stream = split_seed(c.ensemble.seed, 0x6d656173ull);
    for (std::size_t i = 0; i < records.size(); ++i) {
      records[i] = measure_populations(records[i], *c.measurement.n_atoms, split_seed(stream, i));
    }
  }
  return records;
}

RamseyConfig RunConfig::ramsey_config(RamseyMode m) const {
  RamseyConfig rc;
  rc.spin = spin();
  rc.pulse = m == RamseyMode::cat ? cat_pulse() : css_pulse();
  rc.zeeman = zeeman_params();
  rc.ensemble = ensemble_model();
  rc.omega_zz_of_intensity = linear_tensor_shift(omega_zz());
  rc.noise = noise_channels();
  rc.threads = threads;
  return rc;
}

void RunConfig::validate() const {
  if (schema != kConfigSchema) throw ConfigError("schema", "unsupported version " + std::to_string(schema));
  if (two_f < 1 || two_f > 40) throw ConfigError("spin.two_f", "must be in 1..40");
  if (!(control.omega1_hz > 0.0)) throw ConfigError("control.omega1_hz", "must be > 0");
  if (!(control.css_omega1_hz > 0.0)) throw ConfigError("control.css_omega1_hz", "must be > 0");
  if (std::abs(std::abs(control.ratio) - 1.0) > 1e-12) throw ConfigError("control.ratio", "cat pulses need |ratio| = 1");
  if (std::abs(std::abs(control.css_ratio) - 2.0) > 1e-12) {
    throw ConfigError("control.css_ratio", "CSS pulses need |ratio| = 2");
  }
  const int n_alpha = control.alpha_v_au.has_value() + control.alpha_t_au.has_value() + control.intensity_w_m2.has_value();
  if (n_alpha != 0 && n_alpha != 3) {
    throw ConfigError("control", "alpha_v_au, alpha_t_au and intensity_w_m2 go together");
  }
  if (control.intensity_w_m2 && !(*control.intensity_w_m2 > 0.0)) {
    throw ConfigError("control.intensity_w_m2", "must be > 0");
  }
  if (n_alpha == 3) {
    const PulseSpec p = cat_pulse();
    if (p.omega1 == 0.0 || std::abs(std::abs(p.ratio()) - 1.0) > 1e-6) {
      throw ConfigError("control", "polarizabilities do not give |Omega2/Omega1| = 1");
    }
  }
  if (zeeman.gamma_mode != "yb173" && zeeman.gamma_mode != "custom") {
    throw ConfigError("zeeman.gamma_mode", "expected 'yb173' or 'custom'");
  }
  if (zeeman.gamma_mode == "custom" && zeeman.gamma == 0.0) throw ConfigError("zeeman.gamma", "must be nonzero");
  if (lattice.alpha_t_au.has_value() != lattice.intensity_w_m2.has_value()) {
    throw ConfigError("lattice", "alpha_t_au and intensity_w_m2 go together");
  }
  if (lattice.intensity_w_m2 && !(*lattice.intensity_w_m2 > 0.0)) {
    throw ConfigError("lattice.intensity_w_m2", "must be > 0");
  }
  if (ensemble.dist != "delta" && ensemble.dist != "gaussian" && ensemble.dist != "empirical") {
    throw ConfigError("ensemble.dist", "expected 'delta', 'gaussian' or 'empirical'");
  }
  if (ensemble.policy != "monte_carlo" && ensemble.policy != "quadrature") {
    throw ConfigError("ensemble.policy", "expected 'monte_carlo' or 'quadrature'");
  }
  if (!(ensemble.rel_sigma >= 0.0)) throw ConfigError("ensemble.rel_sigma", "must be >= 0");
  if (ensemble.n_samples < 1) throw ConfigError("ensemble.n_samples", "must be >= 1");
  if (ensemble.dist == "empirical") {
    if (ensemble.samples.empty()) throw ConfigError("ensemble.samples", "required for empirical ensembles");
    for (double s : ensemble.samples) {
      if (!(s >= 0.0)) throw ConfigError("ensemble.samples", "intensities must be >= 0");
    }
  } else if (!ensemble.samples.empty()) {
    throw ConfigError("ensemble.samples", "only allowed with dist 'empirical'");
  }
  check_rate(noise.dephase_rate, "noise.dephase_rate");
  check_rate(noise.leak_rate, "noise.leak_rate");
  check_rate(noise.vacuum_rate, "noise.vacuum_rate");
  check_grid(sweep.tau_grid, "sweep.tau_grid");
  check_grid(sweep.area_grid, "sweep.area_grid");
  if (measurement.n_atoms && *measurement.n_atoms < 1) throw ConfigError("measurement.n_atoms", "must be >= 1");
  if (output.format != "csv" && output.format != "json") throw ConfigError("output.format", "expected 'csv' or 'json'");
  for (std::size_t i = 0; i < sensitivity.points.size(); ++i) {
    const auto& p = sensitivity.points[i];
    const std::string key = "sensitivity.points[" + std::to_string(i) + "]";
    if (!(p.tau_s > 0.0)) throw ConfigError(key + ".tau_s", "must be > 0");
    if (!(p.p_bar > 0.0)) throw ConfigError(key + ".p_bar", "must be > 0");
    if (!(p.contrast > 0.0)) throw ConfigError(key + ".contrast", "must be > 0");
  }
  for (std::size_t i = 0; i < sensitivity.css_points.size(); ++i) {
    const auto& p = sensitivity.css_points[i];
    const std::string key = "sensitivity.css_points[" + std::to_string(i) + "]";
    if (!(p.tau_s > 0.0)) throw ConfigError(key + ".tau_s", "must be > 0");
    if (!(p.p_bar > 0.0)) throw ConfigError(key + ".p_bar", "must be > 0");
    if (!(p.slope_per_s > 0.0)) throw ConfigError(key + ".slope_per_s", "must be > 0");
  }
  if (sensitivity.css_reference_t && !(*sensitivity.css_reference_t > 0.0)) {
    throw ConfigError("sensitivity.css_reference_t", "must be > 0");
  }
  if (wigner.n_theta < 2) throw ConfigError("wigner.n_theta", "must be >= 2");
  if (wigner.n_phi < 1) throw ConfigError("wigner.n_phi", "must be >= 1");
  static const std::set<std::string> kStates{"plus", "minus", "cat", "css", "mixture", "mixed"};
  if (!kStates.count(wigner.state)) {
    throw ConfigError("wigner.state", "expected one of plus, minus, cat, css, mixture, mixed");
  }
  if (mode != "cat" && mode != "css") throw ConfigError("mode", "expected 'cat' or 'css'");
  if (threads < 0) throw ConfigError("threads", "must be >= 0");
}

RunConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  RunConfig c;
  Section root(doc, "");
  if (!root.has("schema")) throw ConfigError("schema", "missing (expected " + std::to_string(kConfigSchema) + ")");
  c.schema = static_cast<int>(root.integer("schema", 0));
  if (c.schema != kConfigSchema) throw ConfigError("schema", "unsupported version " + std::to_string(c.schema));

  if (root.has("spin")) {
    Section s(root.raw("spin"), "spin");
    c.two_f = static_cast<int>(s.integer("two_f", c.two_f));
    s.finish();
  }
  if (root.has("control")) {
    Section s(root.raw("control"), "control");
    c.control.omega1_hz = s.number("omega1_hz", c.control.omega1_hz);
    c.control.ratio = s.number("ratio", c.control.ratio);
    c.control.css_omega1_hz = s.number("css_omega1_hz", c.control.css_omega1_hz);
    c.control.css_ratio = s.number("css_ratio", c.control.css_ratio);
    c.control.alpha_v_au = s.optional_number("alpha_v_au");
    c.control.alpha_t_au = s.optional_number("alpha_t_au");
    c.control.intensity_w_m2 = s.optional_number("intensity_w_m2");
    s.finish();
  }
  if (root.has("zeeman")) {
    Section s(root.raw("zeeman"), "zeeman");
    c.zeeman.gamma_mode = s.string("gamma_mode", c.zeeman.gamma_mode);
    c.zeeman.gamma = s.number("gamma", c.zeeman.gamma);
    c.zeeman.b_tesla = s.number("b_tesla", c.zeeman.b_tesla);
    s.finish();
    if (c.zeeman.gamma_mode == "yb173" && c.zeeman.gamma != 0.0) {
      throw ConfigError("zeeman.gamma", "only allowed with gamma_mode 'custom'");
    }
  }
  if (root.has("lattice")) {
    Section s(root.raw("lattice"), "lattice");
    c.lattice.omega_zz_hz = s.number("omega_zz_hz", c.lattice.omega_zz_hz);
    c.lattice.alpha_t_au = s.optional_number("alpha_t_au");
    c.lattice.intensity_w_m2 = s.optional_number("intensity_w_m2");
    s.finish();
  }
  if (root.has("ensemble")) {
    Section s(root.raw("ensemble"), "ensemble");
    c.ensemble.dist = s.string("dist", c.ensemble.dist);
    c.ensemble.rel_sigma = s.number("rel_sigma", c.ensemble.rel_sigma);
    c.ensemble.n_samples = static_cast<int>(s.integer("n_samples", c.ensemble.n_samples));
    c.ensemble.seed = s.unsigned_integer("seed", c.ensemble.seed);
    c.ensemble.policy = s.string("policy", c.ensemble.policy);
    if (s.has("samples")) c.ensemble.samples = number_list(s.raw("samples"), s.path("samples"));
    s.finish();
  }
  if (root.has("noise")) {
    Section s(root.raw("noise"), "noise");
    c.noise.dephase_rate = s.number("dephase_rate", 0.0);
    c.noise.leak_rate = s.number("leak_rate", 0.0);
    c.noise.vacuum_rate = s.number("vacuum_rate", 0.0);
    s.finish();
  }
  if (root.has("sweep")) {
    Section s(root.raw("sweep"), "sweep");
    if (s.has("tau_grid")) c.sweep.tau_grid = grid(s.raw("tau_grid"), s.path("tau_grid"));
    if (s.has("area_grid")) c.sweep.area_grid = grid(s.raw("area_grid"), s.path("area_grid"));
    s.finish();
  }
  if (root.has("measurement")) {
    const json& m = root.raw("measurement");
    if (m.is_string()) {
      if (m.get<std::string>() != "exact") throw ConfigError("measurement", "expected 'exact' or {n_atoms}");
    } else {
      Section s(m, "measurement");
      if (s.has("n_atoms")) {
        const json& n = s.raw("n_atoms");
        if (n.is_string() && n.get<std::string>() == "exact") {
          c.measurement.n_atoms.reset();
        } else if (n.is_number_integer()) {
          c.measurement.n_atoms = n.get<std::int64_t>();
        } else {
          throw ConfigError("measurement.n_atoms", "expected an integer or 'exact'");
        }
      }
      s.finish();
    }
  }
  if (root.has("output")) {
    Section s(root.raw("output"), "output");
    c.output.format = s.string("format", c.output.format);
    c.output.path = s.string("path", c.output.path);
    s.finish();
  }
  if (root.has("sensitivity")) {
    Section s(root.raw("sensitivity"), "sensitivity");
    if (s.has("points")) {
      const json& arr = s.raw("points");
      if (!arr.is_array()) throw ConfigError("sensitivity.points", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section p(arr[i], "sensitivity.points[" + std::to_string(i) + "]");
        c.sensitivity.points.push_back({p.number("tau_s", 0.0), p.number("p_bar", 1.0), p.number("contrast", 1.0)});
        p.finish();
      }
    }
    if (s.has("css_points")) {
      const json& arr = s.raw("css_points");
      if (!arr.is_array()) throw ConfigError("sensitivity.css_points", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section p(arr[i], "sensitivity.css_points[" + std::to_string(i) + "]");
        c.sensitivity.css_points.push_back(
            {p.number("tau_s", 0.0), p.number("p_bar", 1.0), p.number("slope_per_s", 0.0)});
        p.finish();
      }
    }
    c.sensitivity.css_reference_t = s.optional_number("css_reference_t");
    c.sensitivity.simulate = s.boolean("simulate", false);
    s.finish();
  }
  if (root.has("wigner")) {
    Section s(root.raw("wigner"), "wigner");
    c.wigner.n_theta = static_cast<int>(s.integer("n_theta", c.wigner.n_theta));
    c.wigner.n_phi = static_cast<int>(s.integer("n_phi", c.wigner.n_phi));
    c.wigner.state = s.string("state", c.wigner.state);
    s.finish();
  }
  c.mode = root.string("mode", c.mode);
  c.threads = static_cast<int>(root.integer("threads", c.threads));
  root.finish();
  c.validate();
  return c;
}

std::string resolved_config_json(const RunConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json control{{"omega1_hz", c.control.omega1_hz},
                       {"ratio", c.control.ratio},
                       {"css_omega1_hz", c.control.css_omega1_hz},
                       {"css_ratio", c.control.css_ratio}};
  if (c.control.alpha_v_au) {
    control["alpha_v_au"] = opt(c.control.alpha_v_au);
    control["alpha_t_au"] = opt(c.control.alpha_t_au);
    control["intensity_w_m2"] = opt(c.control.intensity_w_m2);
  }
  ordered_json zeeman{{"gamma_mode", c.zeeman.gamma_mode}};
  if (c.zeeman.gamma_mode == "custom") zeeman["gamma"] = c.zeeman.gamma;
  zeeman["b_tesla"] = c.zeeman.b_tesla;
  ordered_json lattice{{"omega_zz_hz", c.lattice.omega_zz_hz}};
  if (c.lattice.alpha_t_au) {
    lattice["alpha_t_au"] = *c.lattice.alpha_t_au;
    lattice["intensity_w_m2"] = *c.lattice.intensity_w_m2;
  }
  ordered_json ensemble{{"dist", c.ensemble.dist},
                        {"rel_sigma", c.ensemble.rel_sigma},
                        {"n_samples", c.ensemble.n_samples},
                        {"seed", c.ensemble.seed},
                        {"policy", c.ensemble.policy}};
  if (!c.ensemble.samples.empty()) ensemble["samples"] = c.ensemble.samples;
  ordered_json points = ordered_json::array();
  for (const auto& p : c.sensitivity.points) {
    points.push_back({{"tau_s", p.tau_s}, {"p_bar", p.p_bar}, {"contrast", p.contrast}});
  }
  ordered_json css_points = ordered_json::array();
  for (const auto& p : c.sensitivity.css_points) {
    css_points.push_back({{"tau_s", p.tau_s}, {"p_bar", p.p_bar}, {"slope_per_s", p.slope_per_s}});
  }
  ordered_json sensitivity{{"points", points}, {"css_points", css_points}, {"simulate", c.sensitivity.simulate}};
  if (c.sensitivity.css_reference_t) sensitivity["css_reference_t"] = *c.sensitivity.css_reference_t;

  ordered_json doc{
      {"schema", c.schema},
      {"spin", {{"two_f", c.two_f}}},
      {"control", control},
      {"zeeman", zeeman},
      {"lattice", lattice},
      {"ensemble", ensemble},
      {"noise",
       {{"dephase_rate", c.noise.dephase_rate}, {"leak_rate", c.noise.leak_rate}, {"vacuum_rate", c.noise.vacuum_rate}}},
      {"sweep", {{"tau_grid", c.sweep.tau_grid}, {"area_grid", c.sweep.area_grid}}},
      {"measurement",
       {{"n_atoms", c.measurement.n_atoms ? ordered_json(*c.measurement.n_atoms) : ordered_json("exact")}}},
      {"output", {{"format", c.output.format}, {"path", c.output.path}}},
      {"sensitivity", sensitivity},
      {"wigner", {{"n_theta", c.wigner.n_theta}, {"n_phi", c.wigner.n_phi}, {"state", c.wigner.state}}},
      {"mode", c.mode},
      {"threads", c.threads}};
  return doc.dump(2) + "\n";
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : resolved_config_json(config)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace spincat
