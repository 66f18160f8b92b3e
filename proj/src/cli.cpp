#include "spincat/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "json_convert.hpp"
#include "spincat/config.hpp"
#include "spincat/fit.hpp"
#include "spincat/metrology.hpp"
#include "spincat/records_io.hpp"
#include "spincat/sequence.hpp"

#ifndef SPINCAT_VERSION
#define SPINCAT_VERSION "dev"
#endif

namespace spincat {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Options {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string format;
  std::string state;
  std::string input;
  std::string model = "cosine";
  std::string branch = "plus";
  std::string series;
};

// Input/data problems that are not configuration errors.
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RunConfig load_config(const Options& o) {
  RunConfig c;
  if (!o.config_path.empty()) {
    std::string text;
    try {
      text = read_text_file(o.config_path);
    } catch (const std::exception& e) {
      throw ConfigError("--config", e.what());
    }
    c = parse_config(text);
  }
  if (o.seed) c.ensemble.seed = *o.seed;
  if (!o.mode.empty()) c.mode = o.mode;
  if (!o.format.empty()) c.output.format = o.format;
  if (!o.out_dir.empty()) c.output.path = o.out_dir;
  if (!o.state.empty()) c.wigner.state = o.state;
  c.validate();
  return c;
}

struct Writer {
  const RunConfig* config = nullptr;
  std::string command;
  fs::path dir;
  std::ostream& out;

  // <stem>.<ext> plus <stem>.meta.json and (when a config applies) <stem>.config.json.
  void emit(const std::string& stem, const std::string& ext, const std::string& body,
            ordered_json extra_meta = ordered_json::object()) const {
    const fs::path data = dir / (stem + "." + ext);
    write_text_file(data, body);
    ordered_json meta{{"tool", "spincat"}, {"version", SPINCAT_VERSION}, {"command", command},
                      {"output", data.filename().string()}};
    if (config) {
      meta["config_hash"] = config_hash(*config);
      meta["seed"] = config->ensemble.seed;
      meta["config_snapshot"] = stem + ".config.json";
      write_text_file(dir / (stem + ".config.json"), resolved_config_json(*config));
    }
    for (auto it = extra_meta.begin(); it != extra_meta.end(); ++it) meta[it.key()] = it.value();
    write_text_file(dir / (stem + ".meta.json"), meta.dump(2) + "\n");
    out << "wrote " << data.string() << '\n';
  }
};

RamseyMode parse_mode(const std::string& m) { return m == "css" ? RamseyMode::css : RamseyMode::cat; }

int cmd_rabi(const RunConfig& c, const Writer& w) {
  if (c.sweep.area_grid.empty()) throw ConfigError("sweep.area_grid", "required and nonempty for 'rabi'");
  const double ratio = c.mode == "css" ? c.css_pulse().ratio() : c.cat_pulse().ratio();
  const std::vector<double> p = rabi_scan(c.spin(), ratio, c.sweep.area_grid);
  const bool csv = c.output.format == "csv";
  w.emit("rabi_" + c.mode, csv ? "csv" : "json", csv ? rabi_csv(c.sweep.area_grid, p) : rabi_json(c.sweep.area_grid, p),
         {{"ratio", ratio}});
  return kExitOk;
}

int cmd_ramsey(const RunConfig& c, const Writer& w) {
  if (c.sweep.tau_grid.empty()) throw ConfigError("sweep.tau_grid", "required and nonempty for 'ramsey'");
  const auto records = simulate_ramsey(c, c.sweep.tau_grid, parse_mode(c.mode));
  const bool csv = c.output.format == "csv";
  w.emit("ramsey_" + c.mode, csv ? "csv" : "json", csv ? fringe_records_csv(records) : fringe_records_json(records));
  return kExitOk;
}

// Local cosine fit over one fringe period centred on tau gives P_bar(tau), C(tau).
SensitivityPoint simulated_point(const RunConfig& c, double tau) {
  constexpr int kPoints = 24;
  const double omega = 2.0 * c.spin().value() * std::abs(c.gamma() * c.zeeman.b_tesla);
  if (!(omega > 0.0)) throw RunError("sensitivity.simulate needs a nonzero field");
  const double period = 2.0 * constants::pi / omega;
  const double start = std::max(0.0, tau - 0.5 * period);
  std::vector<double> taus(kPoints);
  for (int i = 0; i < kPoints; ++i) taus[i] = start + period * i / (kPoints - 1);
  const auto records = simulate_ramsey(c, taus, RamseyMode::cat);
  const FitResult plus = fit_cosine(records, Branch::plus);
  const FitResult minus = fit_cosine(records, Branch::minus);
  const FitResult avg = average_branches(plus, minus);
  if (!avg.converged) throw RunError("local fringe fit did not converge at tau = " + format_double(tau));
  return {tau, avg.value("p_bar"), avg.value("contrast")};
}

int cmd_sensitivity(const RunConfig& c, const Writer& w) {
  std::vector<SensitivityPoint> points = c.sensitivity.points;
  if (c.sensitivity.simulate) {
    if (c.sweep.tau_grid.empty()) throw ConfigError("sweep.tau_grid", "required when sensitivity.simulate is true");
    for (double tau : c.sweep.tau_grid) {
      if (tau > 0.0) points.push_back(simulated_point(c, tau));
    }
  }
  if (points.empty() && c.sensitivity.css_points.empty()) {
    throw ConfigError("sensitivity.points", "no fitted points given and simulate is false");
  }
  const SpinQuantum spin = c.spin();
  const double gamma = c.gamma();
  ordered_json cat = ordered_json::array();
  for (const auto& p : points) {
    const SensitivityReport r = sensitivity_cat(p.p_bar, p.contrast, spin, gamma, p.tau_s);
    ordered_json j = detail::to_json(r);
    j["p_bar"] = p.p_bar;
    j["contrast"] = p.contrast;
    if (c.sensitivity.css_reference_t) j["enhancement_db"] = enhancement_db(*c.sensitivity.css_reference_t, r.sigma_b);
    cat.push_back(j);
  }
  ordered_json css = ordered_json::array();
  for (const auto& p : c.sensitivity.css_points) {
    const SensitivityReport r = sensitivity_css(p.p_bar, p.slope_per_s, gamma, c.zeeman.b_tesla, p.tau_s, spin);
    ordered_json j = detail::to_json(r);
    j["p_bar"] = p.p_bar;
    j["slope_per_s"] = p.slope_per_s;
    css.push_back(j);
  }
  ordered_json doc{{"gamma_rad_s_t", gamma}, {"cat", cat}, {"css", css}};
  if (c.sensitivity.css_reference_t) doc["css_reference_t"] = *c.sensitivity.css_reference_t;
  w.emit("sensitivity", "json", doc.dump(2) + "\n");
  return kExitOk;
}

Operator wigner_state(const RunConfig& c) {
  const SpinQuantum spin = c.spin();
  const std::string& s = c.wigner.state;
  if (s == "plus") return basis_ket(spin, spin.two_f()).density();
  if (s == "minus") return basis_ket(spin, -spin.two_f()).density();
  if (s == "cat") return apply_pulse(basis_ket(spin, spin.two_f()), c.cat_pulse()).density();
  if (s == "css") return coherent_state(spin, constants::pi / 2.0, 0.0).density();
  if (s == "mixture") {
    const std::vector<double> phases(mixture_weights(spin).size(), 0.0);
    return mixture_density(spin, phases);
  }
  if (s == "mixed") return Operator::Identity(spin.dim(), spin.dim()) / static_cast<double>(spin.dim());
  throw ConfigError("wigner.state", "unknown selector '" + s + "'");
}

int cmd_wigner(const RunConfig& c, const Writer& w) {
  const WignerMap map = wigner_map(wigner_state(c), c.wigner.n_theta, c.wigner.n_phi, c.threads);
  const bool csv = c.output.format == "csv";
  w.emit("wigner_" + c.wigner.state, csv ? "csv" : "json", csv ? wigner_csv(map) : wigner_json(map),
         {{"min", map.min_value()}, {"max", map.max_value()}, {"integral", map.integral()},
          {"convention", map.convention}});
  w.out << "min " << format_double(map.min_value()) << " max " << format_double(map.max_value()) << '\n';
  return kExitOk;
}

int cmd_fit(const Options& o, const Writer& w) {
  if (o.input.empty()) throw ConfigError("--input", "required for 'fit'");
  const ModelKind model = [&] {
    try {
      return model_kind_from_string(o.model);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("--model", e.what());
    }
  }();
  std::string text;
  try {
    text = read_text_file(o.input);
  } catch (const std::exception& e) {
    throw RunError(e.what());
  }
  const bool json_input = fs::path(o.input).extension() == ".json";

  ordered_json doc;
  bool converged = true;
  if (model == ModelKind::cosine || model == ModelKind::harmonics_135) {
    const auto records = json_input ? parse_fringe_json(text) : parse_fringe_csv(text);
    auto fit_branch = [&](Branch b) {
      return model == ModelKind::cosine ? fit_cosine(records, b) : fit_harmonics(records, b);
    };
    if (o.branch == "both") {
      const FitResult plus = fit_branch(Branch::plus);
      const FitResult minus = fit_branch(Branch::minus);
      const FitResult avg = average_branches(plus, minus);
      converged = avg.converged;
      doc = {{"plus", detail::to_json(plus)}, {"minus", detail::to_json(minus)}, {"average", detail::to_json(avg)}};
    } else {
      const FitResult fit = fit_branch(o.branch == "minus" ? Branch::minus : Branch::plus);
      converged = fit.converged;
      doc = detail::to_json(fit);
    }
  } else {
    // Decay fits read tau_s and one value column; engine files default to p_plus + p_minus.
    const std::vector<std::string> required{"tau_s"};
    const CsvTable table = parse_csv(text, required);
    std::vector<double> values;
    const std::string series = !o.series.empty() ? o.series : (table.has("value") ? "value" : "p_sum");
    if (series == "p_sum") {
      const auto& a = table.column("p_plus");
      const auto& b = table.column("p_minus");
      for (std::size_t i = 0; i < table.rows; ++i) values.push_back(a[i] + b[i]);
    } else {
      values = table.column(series);
    }
    DecayOptions opts;
    if (series == "contrast") opts.fixed_offset = 0.0;
    const FitResult fit = fit_decay(table.column("tau_s"), values, model, opts);
    converged = fit.converged;
    doc = detail::to_json(fit);
    doc["series"] = series;
  }
  const std::string stem = "fit_" + std::string(to_string(model));
  w.emit(stem, "json", doc.dump(2) + "\n", {{"input", fs::path(o.input).filename().string()}});
  if (!converged) {
    w.out << "fit did not converge\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"spincat: spin-cat Ramsey magnetometry simulator and analysis"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration");
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--seed", o.seed, "override ensemble.seed");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  CLI::App* rabi = app.add_subcommand("rabi", "P_{+F} versus pulse area");
  add_common(rabi);
  rabi->add_option("--mode", o.mode, "cat or css pulse ratio")->check(CLI::IsMember({"cat", "css"}));
  CLI::App* ramsey_cmd = app.add_subcommand("ramsey", "Ramsey fringe simulation");
  add_common(ramsey_cmd);
  ramsey_cmd->add_option("--mode", o.mode, "cat or css")->check(CLI::IsMember({"cat", "css"}));
  CLI::App* sens = app.add_subcommand("sensitivity", "magnetic sensitivity sweep");
  add_common(sens);
  CLI::App* wig = app.add_subcommand("wigner", "Wigner map export");
  add_common(wig);
  wig->add_option("--state", o.state, "plus, minus, cat, css, mixture or mixed");
  CLI::App* fit = app.add_subcommand("fit", "fit fringe or decay data");
  add_common(fit);
  fit->add_option("--input", o.input, "engine CSV/JSON or tau_s,value CSV")->required();
  fit->add_option("--model", o.model, "cosine, harmonics_135, exponential, double_exponential");
  fit->add_option("--branch", o.branch, "plus, minus or both")->check(CLI::IsMember({"plus", "minus", "both"}));
  fit->add_option("--series", o.series, "value column for decay fits (default value or p_sum)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  o.command = app.get_subcommands().front()->get_name();

  try {
    if (o.command == "fit") {
      std::optional<RunConfig> c;
      if (!o.config_path.empty()) c = load_config(o);
      const fs::path dir = !o.out_dir.empty() ? fs::path(o.out_dir) : fs::path(c ? c->output.path : ".");
      Writer w{c ? &*c : nullptr, o.command, dir, out};
      return cmd_fit(o, w);
    }
    const RunConfig c = load_config(o);
    Writer w{&c, o.command, fs::path(c.output.path), out};
    if (o.command == "rabi") return cmd_rabi(c, w);
    if (o.command == "ramsey") return cmd_ramsey(c, w);
    if (o.command == "sensitivity") return cmd_sensitivity(c, w);
    return cmd_wigner(c, w);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SchemaError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const FitError& e) {
    err << "fit error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace spincat
