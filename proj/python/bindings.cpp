#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "harvest/errors.hpp"
#include "harvest/scenario.hpp"

namespace py = pybind11;
using namespace harvest;

namespace {

CovarianceTwoMode two_mode(const Mat4& g) {
  CovarianceTwoMode c;
  c.gamma = g;
  return c;
}

py::dict row_dict(const SweepRow& r) {
  py::dict d;
  d["lambda"] = r.lambda;
  d["p_s"] = r.p_s;
  d["nu_minus"] = r.nu_minus;
  d["negativity"] = r.negativity;
  d["det_a"] = r.det_a;
  d["det_b"] = r.det_b;
  d["det_c"] = r.det_c;
  d["trace_term"] = r.trace_term;
  return d;
}

struct Scenario {
  ScenarioConfig config;
  HarvestScenario sc;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Entanglement harvesting with local modes on a 1+1 lattice";

  static py::exception<Error> exc(m, "HarvestError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(exc, e.what());
    }
  });

  m.def("simon_value", [](const Mat4& g) { return simon_value(two_mode(g)); });
  m.def("nu_minus", [](const Mat4& g) { return nu_minus(two_mode(g)); });
  m.def("negativity", [](const Mat4& g) { return negativity(two_mode(g)); });
  m.def("check_uncertainty", [](const Mat4& g, double tol) { return check_uncertainty(two_mode(g), tol); },
        py::arg("gamma"), py::arg("tol") = kDefaultTol);
  m.def("partial_transpose", [](const Mat4& g) { return partial_transpose(two_mode(g)).gamma; });
  m.def("mode_number_expectation",
        [](const Mat2& A, const Vec2& chi) { return mode_number_expectation({A, chi}); },
        py::arg("A"), py::arg("chi") = Vec2::Zero());
  m.def("weyl_expectation", &weyl_expectation, py::arg("gamma"), py::arg("chi"), py::arg("xi"));
  m.def("p_function_witness", [](const Mat4& g) -> py::object {
    const auto rep = p_function_witness(two_mode(g));
    if (!rep) return py::none();
    py::dict d;
    d["rank_deficient"] = rep->rank_deficient;
    d["normalization"] = rep->normalization;
    d["precision_matrix"] = rep->precision_matrix;
    d["shift"] = rep->shift;
    return d;
  });

  py::class_<Scenario>(m, "Scenario")
      .def_static("load", [](const std::string& path) {
        Scenario s;
        s.config = parse_config_file(path);
        s.sc = build_scenario(s.config);
        return s;
      })
      .def_static("from_string", [](const std::string& text) {
        std::istringstream in(text);
        Scenario s;
        s.config = parse_config(in);
        s.sc = build_scenario(s.config);
        return s;
      })
      .def("to_string", [](const Scenario& s) { return serialize_config(s.config); })
      .def_property_readonly("lambdas", [](const Scenario& s) { return s.sc.lambda_grid; })
      .def("covariance", [](const Scenario& s, double l) { return assemble_blocks(s.sc, l).gamma; })
      .def("sweep", [](const Scenario& s) {
        py::list out;
        for (const SweepRow& r : sweep(s.sc)) out.append(row_dict(r));
        return out;
      })
      .def("sweep_csv", [](const Scenario& s) {
        std::ostringstream o;
        write_sweep_csv(sweep(s.sc), o);
        return o.str();
      })
      .def("critical", [](const Scenario& s, double a, double b, double tol, int scan) -> py::object {
        const CriticalResult r = critical_coupling(s.sc, a, b, tol, scan);
        if (!r.lambda_min) return py::none();
        return py::float_(*r.lambda_min);
      }, py::arg("a"), py::arg("b"), py::arg("tol") = 1e-4, py::arg("scan") = 40)
      .def("perturb", [](const Scenario& s) {
        const PerturbativeCoefficients c = perturbative_coefficients(s.sc);
        py::dict d;
        d["p0"] = c.p0;
        d["p2"] = c.p2;
        d["p4"] = c.p4;
        d["p4_tilde"] = c.p4_tilde;
        return d;
      })
      .def("signal", [](const Scenario& s, double l, const std::string& probe) {
        const DetectorSignal d = detector_signal(s.sc, l, probe == "b" ? kProbeB : kProbeA);
        return py::make_tuple(d.total, d.system_part, d.probe_part);
      }, py::arg("lam"), py::arg("probe") = "a");

  m.def("cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "harvest");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
