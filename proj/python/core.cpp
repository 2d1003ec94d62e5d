#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "khk/experiment.hpp"

namespace py = pybind11;

namespace {

khk::System make_system(const std::string& kind, const std::string& params_json) {
  const khk::SystemKind k = khk::kind_from_name(kind);
  if (params_json.empty()) return khk::build_system(khk::default_config(k).params);
  return khk::build_system(khk::params_from_json(k, nlohmann::json::parse(params_json)));
}

py::dict named_dict(const khk::NamedValues& values) {
  py::dict out;
  for (const auto& [name, value] : values) out[py::str(name)] = value;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Kahan discretization of quadratic vector fields";

  py::register_exception<khk::SingularStep>(m, "SingularStep", PyExc_ArithmeticError);
  py::register_exception<khk::DenominatorZero>(m, "DenominatorZero", PyExc_ZeroDivisionError);
  py::register_exception<khk::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<khk::System>(m, "System")
      .def(py::init(&make_system), py::arg("kind"), py::arg("params_json") = "")
      .def_property_readonly("kind",
                             [](const khk::System& s) { return std::string(khk::kind_name(s.kind())); })
      .def_property_readonly("dim", &khk::System::dim)
      .def_property_readonly("integrals", [](const khk::System& s) { return s.descriptor.integrals; })
      .def_property_readonly("densities", [](const khk::System& s) { return s.descriptor.densities; })
      .def_property_readonly("params_json",
                             [](const khk::System& s) {
                               return khk::params_to_json(s.descriptor.params).dump();
                             })
      .def("field", [](const khk::System& s, const khk::State& x) {
        return khk::State(khk::evaluate_field(s.field, x));
      }, py::arg("x"))
      .def("delta", [](const khk::System& s, const khk::State& x, double eps) {
        return khk::delta(s.field, x, eps);
      }, py::arg("x"), py::arg("eps"))
      .def("step", [](const khk::System& s, const khk::State& x, double eps) {
        const khk::KahanStepResult r = khk::kahan_step(s.field, x, eps);
        return py::make_tuple(r.next, r.delta);
      }, py::arg("x"), py::arg("eps"), "One Kahan step; returns (next state, Delta).")
      .def("orbit", [](const khk::System& s, const khk::State& x0, double eps, int steps) {
        const khk::OrbitRecord orbit = khk::iterate_orbit(s.field, x0, eps, steps);
        khk::Matrix states(static_cast<Eigen::Index>(orbit.size()), s.dim());
        for (std::size_t k = 0; k < orbit.size(); ++k) {
          states.row(static_cast<Eigen::Index>(k)) = orbit.states[k].transpose();
        }
        return py::make_tuple(states, orbit.stopped_at_pole());
      }, py::arg("x0"), py::arg("eps"), py::arg("steps"),
         "States x_0..x_k as rows and whether the orbit stopped at a pole.")
      .def("integrals_at", [](const khk::System& s, const khk::State& x, double eps) {
        return named_dict(khk::evaluate_integrals(s, x, eps));
      }, py::arg("x"), py::arg("eps"))
      .def("conserved_names", [](const khk::System& s) { return khk::conserved_names(s); })
      .def("conserved", [](const khk::System& s, const std::string& name, const khk::State& x,
                           double eps) { return khk::conserved_quantity(s, name)(x, eps); },
           py::arg("name"), py::arg("x"), py::arg("eps"))
      .def("hk_scan", [](const khk::System& s, const khk::State& x0, double eps, int max_order,
                         int window) {
        khk::ExperimentConfig cfg;
        cfg.params = s.descriptor.params;
        cfg.eps = eps;
        cfg.hk.max_order = max_order;
        cfg.hk.window = window;
        return khk::hk_scan_json(s, x0, cfg, khk::run_hk_scan(s, x0, cfg)).dump();
      }, py::arg("x0"), py::arg("eps"), py::arg("max_order") = 0, py::arg("window") = 8)
      .def("verify", [](const khk::System& s, double eps, int trials, int steps, std::uint64_t seed) {
        khk::SuiteOptions opts;
        opts.eps = eps;
        opts.trials = trials;
        opts.steps = steps;
        opts.seed = seed;
        std::vector<khk::PropertyReport> reports;
        {
          py::gil_scoped_release release;
          reports = khk::run_suite(s, opts);
        }
        return nlohmann::json(reports).dump();
      }, py::arg("eps") = 0.05, py::arg("trials") = 200, py::arg("steps") = 1000,
         py::arg("seed") = 42);

  m.def("canonical_config", [](const std::string& text) {
    return khk::to_json(khk::parse_config_text(text)).dump();
  }, py::arg("text"), "Parses a configuration and returns its canonical JSON form.");

  m.def("simulate_csv", [](const std::string& config_text) {
    const khk::ExperimentConfig cfg = khk::parse_config_text(config_text);
    const khk::System sys = khk::build_system(cfg.params);
    std::ostringstream os;
    khk::write_orbit_csv(os, sys, khk::initial_state(sys, cfg), cfg.eps, cfg.steps);
    return os.str();
  }, py::arg("config_text"), "orbit.csv contents for a configuration.");

  m.def("kinds", []() {
    std::vector<std::string> out;
    for (auto k : {khk::SystemKind::GeneralClebsch, khk::SystemKind::FirstClebsch,
                   khk::SystemKind::SecondClebsch, khk::SystemKind::Kirchhoff,
                   khk::SystemKind::Lagrange, khk::SystemKind::PlanarFamily}) {
      out.emplace_back(khk::kind_name(k));
    }
    return out;
  });
}
