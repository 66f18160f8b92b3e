#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spincat/cli.hpp"
#include "spincat/config.hpp"
#include "spincat/fit.hpp"
#include "spincat/light_shift.hpp"
#include "spincat/metrology.hpp"
#include "spincat/records_io.hpp"
#include "spincat/sequence.hpp"

namespace py = pybind11;
using namespace spincat;

namespace {

py::dict records_to_dict(const std::vector<FringeRecord>& records) {
  std::vector<double> tau, plus, minus, in;
  for (const auto& r : records) {
    tau.push_back(r.tau);
    plus.push_back(r.p_plus);
    minus.push_back(r.p_minus);
    in.push_back(r.p_in);
  }
  py::dict d;
  d["tau_s"] = tau;
  d["p_plus"] = plus;
  d["p_minus"] = minus;
  d["p_in"] = in;
  if (!records.empty() && records.front().counts) {
    std::vector<std::int64_t> n, np, nm;
    for (const auto& r : records) {
      n.push_back(r.counts->n);
      np.push_back(r.counts->n_plus);
      nm.push_back(r.counts->n_minus);
    }
    d["n"] = n;
    d["n_plus"] = np;
    d["n_minus"] = nm;
  }
  return d;
}

py::dict fit_to_dict(const FitResult& f) {
  py::dict params;
  for (const auto& p : f.params) params[py::str(p.name)] = py::make_tuple(p.value, p.sigma);
  py::dict d;
  d["model"] = std::string(to_string(f.model));
  d["params"] = params;
  d["covariance"] = f.covariance;
  d["residual_norm"] = f.residual_norm;
  d["converged"] = f.converged;
  d["degenerate"] = f.degenerate;
  d["warnings"] = f.warnings;
  return d;
}

RamseyMode mode_of(const std::string& m) {
  if (m == "cat") return RamseyMode::cat;
  if (m == "css") return RamseyMode::css;
  throw py::value_error("mode must be 'cat' or 'css'");
}

Branch branch_of(const std::string& b) {
  if (b == "plus") return Branch::plus;
  if (b == "minus") return Branch::minus;
  throw py::value_error("branch must be 'plus' or 'minus'");
}

}  // namespace

PYBIND11_MODULE(_spincat, m) {
  m.doc() = "Spin-F cat-state Ramsey magnetometry";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);

  m.attr("YB173_GAMMA") = constants::yb173_gamma;

  m.def("angular_momentum", [](int two_f) {
    const auto j = angular_momentum_operators(SpinQuantum(two_f));
    return py::make_tuple(j.fx, j.fy, j.fz);
  }, py::arg("two_f"), "(Fx, Fy, Fz) in the basis m = +F ... -F");

  m.def("propagator", &propagator, py::arg("hamiltonian"), py::arg("t"));

  m.def("cat_state", [](int two_f, double phase) { return cat_state(SpinQuantum(two_f), phase).ket(); },
        py::arg("two_f"), py::arg("phase") = 0.0);
  m.def("coherent_state",
        [](int two_f, double theta, double phi) { return coherent_state(SpinQuantum(two_f), theta, phi).ket(); },
        py::arg("two_f"), py::arg("theta"), py::arg("phi"));

  m.def("pulse_propagator",
        [](int two_f, double omega1, double omega2, double area) {
          return pulse_propagator({omega1, omega2, area}, SpinQuantum(two_f));
        },
        py::arg("two_f"), py::arg("omega1"), py::arg("omega2"), py::arg("area"));

  m.def("rabi_scan",
        [](int two_f, double ratio, const std::vector<double>& areas) {
          return rabi_scan(SpinQuantum(two_f), ratio, areas);
        },
        py::arg("two_f"), py::arg("ratio"), py::arg("areas"));

  m.def("control_rabi_frequencies",
        [](double alpha_s, double alpha_v, double alpha_t, double intensity, int two_f) {
          return control_rabi_frequencies({alpha_s, alpha_v, alpha_t}, FieldAmplitude::from_intensity(intensity),
                                          SpinQuantum(two_f));
        },
        py::arg("alpha_s_au"), py::arg("alpha_v_au"), py::arg("alpha_t_au"), py::arg("intensity_w_m2"),
        py::arg("two_f") = 5, "(Omega_x^(1), Omega_xx^(2)) in rad/s from sigma+ light along x");

  m.def("mixture_weights", [](int two_f) {
    std::vector<py::tuple> out;
    for (const auto& w : mixture_weights(SpinQuantum(two_f))) out.push_back(py::make_tuple(w.two_abs_m, w.weight));
    return out;
  }, py::arg("two_f"), "[(2|m|, weight)] in ascending |m|");

  m.def("mixture_density",
        [](int two_f, const std::vector<double>& phases) { return mixture_density(SpinQuantum(two_f), phases); },
        py::arg("two_f"), py::arg("phases"));

  m.def("qfi_pure", [](const Ket& psi, const Operator& g) { return qfi_pure(SpinState::pure(psi), g); },
        py::arg("ket"), py::arg("generator"));
  m.def("qfi_mixed", py::overload_cast<const Operator&, const Operator&>(&qfi_mixed), py::arg("rho"),
        py::arg("generator"));
  m.def("trace_distance", &trace_distance, py::arg("a"), py::arg("b"));

  m.def("sensitivity_cat",
        [](double p_bar, double contrast, double tau, int two_f, double gamma) {
          const SensitivityReport r = sensitivity_cat(p_bar, contrast, SpinQuantum(two_f), gamma, tau);
          py::dict d;
          d["sigma_b_t"] = r.sigma_b;
          d["sql_t"] = r.limit_sql;
          d["hl_t"] = r.limit_hl;
          d["fisher_classical"] = r.fisher_classical;
          d["fisher_quantum"] = r.fisher_quantum;
          return d;
        },
        py::arg("p_bar"), py::arg("contrast"), py::arg("tau_s"), py::arg("two_f") = 5,
        py::arg("gamma") = constants::yb173_gamma);
  m.def("enhancement_db", &enhancement_db, py::arg("sigma_reference"), py::arg("sigma"));

  m.def("ramsey",
        [](const std::string& config_json, const std::vector<double>& taus, const std::string& mode) {
          const RunConfig c = parse_config(config_json);
          c.validate();
          return records_to_dict(simulate_ramsey(c, taus, mode_of(mode)));
        },
        py::arg("config_json"), py::arg("taus"), py::arg("mode") = "cat",
        "Ramsey records for a JSON run configuration");

  m.def("resolved_config", [](const std::string& config_json) { return resolved_config_json(parse_config(config_json)); },
        py::arg("config_json"));

  m.def("fit_cosine",
        [](const std::vector<double>& tau, const std::vector<double>& values) {
          return fit_to_dict(fit_cosine(tau, values));
        },
        py::arg("tau"), py::arg("values"));
  m.def("fit_harmonics",
        [](const std::vector<double>& tau, const std::vector<double>& values, const std::string& branch) {
          return fit_to_dict(fit_harmonics(tau, values, branch_of(branch)));
        },
        py::arg("tau"), py::arg("values"), py::arg("branch") = "plus");
  m.def("fit_decay",
        [](const std::vector<double>& tau, const std::vector<double>& values, const std::string& model,
           std::optional<double> fixed_offset) {
          DecayOptions opts;
          opts.fixed_offset = fixed_offset;
          return fit_to_dict(fit_decay(tau, values, model_kind_from_string(model), opts));
        },
        py::arg("tau"), py::arg("values"), py::arg("model") = "exponential", py::arg("fixed_offset") = py::none());

  m.def("wigner_map",
        [](const Operator& rho, int n_theta, int n_phi) {
          const WignerMap w = wigner_map(rho, n_theta, n_phi);
          return py::make_tuple(w.theta, w.phi, w.values);
        },
        py::arg("rho"), py::arg("n_theta") = 64, py::arg("n_phi") = 128, "(theta, phi, W[theta, phi])");

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command line; returns (exit_code, stdout, stderr)");
}
