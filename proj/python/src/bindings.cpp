// Thin layer: JSON strings cross the boundary, python/wbkit turns them into dicts.

#include "wbkit/errors.hpp"
#include "wbkit/framed_loop.hpp"
#include "wbkit/report.hpp"
#include "wbkit/scenarios.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;

namespace {

wb::Tolerances scaled_tol(double scale) { return wb::Tolerances{}.scaled(scale); }

}  // namespace

PYBIND11_MODULE(_wbkit, m) {
    auto error = py::register_exception<wb::Error>(m, "WbError", PyExc_RuntimeError);
    py::register_exception<wb::ConfigError>(m, "ConfigError", error.ptr());
    py::register_exception<wb::ParseError>(m, "ParseError", error.ptr());

    m.def(
        "verify_json",
        [](const std::string& scenario, const std::map<std::string, std::string>& params, int levels,
           std::uint64_t seed, int jobs, double tol_scale) {
            wb::RunConfig cfg;
            cfg.scenario = scenario;
            cfg.params = params;
            cfg.levels = levels;
            cfg.seed = seed;
            cfg.jobs = jobs;
            cfg.tol = scaled_tol(tol_scale);
            cfg.tol_scale = tol_scale;
            cfg.validate();
            wb::ScenarioReport rep;
            {
                py::gil_scoped_release nogil;
                rep = wb::run_scenario(cfg.scenario, cfg.scenario_config());
            }
            return std::make_pair(rep.failures(), wb::report_json(rep, cfg));
        },
        py::arg("scenario"), py::arg("params"), py::arg("levels"), py::arg("seed"), py::arg("jobs"),
        py::arg("tol_scale"));

    m.def(
        "loop_check",
        [](const std::string& file, const std::string& out_dir, double tol_scale) {
            std::ostringstream os;
            const int code = wb::cmd_loop_check(file, scaled_tol(tol_scale), os, out_dir);
            return std::make_pair(code, os.str());
        },
        py::arg("file"), py::arg("out_dir"), py::arg("tol_scale"));

    m.def(
        "solve",
        [](const std::string& file, const std::string& out_dir, double tol_scale) {
            std::ostringstream os;
            int code;
            {
                py::gil_scoped_release nogil;
                code = wb::cmd_solve(file, scaled_tol(tol_scale), out_dir, os);
            }
            return std::make_pair(code, os.str());
        },
        py::arg("file"), py::arg("out_dir"), py::arg("tol_scale"));

    m.def("fixture_names", &wb::fixture_names);
    m.def("fixture_text", &wb::fixture_text, py::arg("name"));

    m.def(
        "cone_dual_norm_sq",
        [](double alpha, double r0, double R) {
            wb::ConeSpec s;
            s.alpha = alpha;
            s.r0 = r0;
            s.R = R;
            return wb::cone_h1_exact(s);
        },
        py::arg("alpha"), py::arg("r0") = 0.05, py::arg("R") = 1.0);
    m.def(
        "cone_burgers",
        [](double c, double r, int n) {
            const wb::BurgersResult b = wb::burgers_vector(wb::cone_frame_loop(c, r, n));
            return std::make_pair(b.magnitude, b.dual_magnitude);
        },
        py::arg("c"), py::arg("r"), py::arg("n") = 1024);
    m.def(
        "dipole_improved_bound",
        [](double eps, double r0, double R) {
            wb::DipoleSpec s;
            s.eps = eps;
            s.r0 = r0;
            s.R = R;
            return wb::dipole_improved_bound(s);
        },
        py::arg("eps"), py::arg("r0") = 1.0, py::arg("R") = 20.0);
}
