#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>

#include "gradflow/cli.hpp"
#include "gradflow/diagnostics.hpp"
#include "gradflow/limiter.hpp"
#include "gradflow/problem.hpp"
#include "gradflow/solver.hpp"
#include "gradflow/verify.hpp"

namespace py = pybind11;
namespace gf = gradflow;

namespace {

py::array_t<double> coefficient_array(const gf::DGField& f) {
  py::array_t<double> out({f.n_cells(), f.modes()});
  std::copy(f.coeffs().begin(), f.coeffs().end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Positivity-preserving DG solver for nonlinear nonlocal Fokker-Planck equations.";

  py::enum_<gf::Integrator>(m, "Integrator")
      .value("euler", gf::Integrator::euler)
      .value("rk3", gf::Integrator::rk3);

  py::class_<gf::SchemeParams>(m, "SchemeParams")
      .def(py::init<>())
      .def_readwrite("beta0", &gf::SchemeParams::beta0)
      .def_readwrite("beta1", &gf::SchemeParams::beta1)
      .def_readwrite("delta", &gf::SchemeParams::delta)
      .def_readwrite("degree", &gf::SchemeParams::degree)
      .def_readwrite("gauss_points", &gf::SchemeParams::gauss_points)
      .def_readwrite("lobatto_points", &gf::SchemeParams::lobatto_points)
      .def_readwrite("safety", &gf::SchemeParams::safety)
      .def_readwrite("cap_coef", &gf::SchemeParams::cap_coef)
      .def_readwrite("diffusive_safety", &gf::SchemeParams::diffusive_safety)
      .def_readwrite("fixed_dt", &gf::SchemeParams::fixed_dt)
      .def_readwrite("integrator", &gf::SchemeParams::integrator)
      .def_readwrite("strict_energy", &gf::SchemeParams::strict_energy);
  m.def("default_params", &gf::default_params);
  m.def("beta0_lower_bound", &gf::beta0_lower_bound, py::arg("degree"),
        py::arg("beta1"));

  py::class_<gf::ProblemSpec>(m, "ProblemSpec")
      .def_readonly("id", &gf::ProblemSpec::id)
      .def_readonly("name", &gf::ProblemSpec::name)
      .def_readonly("variant", &gf::ProblemSpec::variant)
      .def_readonly("description", &gf::ProblemSpec::description)
      .def_readonly("a", &gf::ProblemSpec::a)
      .def_readonly("b", &gf::ProblemSpec::b)
      .def_readonly("default_t_final", &gf::ProblemSpec::default_t_final)
      .def_readonly("default_n_cells", &gf::ProblemSpec::default_n_cells)
      .def_readonly("default_degree", &gf::ProblemSpec::default_degree)
      .def("initial_datum", [](const gf::ProblemSpec& p, double x) {
        return p.initial_datum(x);
      })
      .def_property_readonly("has_exact_solution", [](const gf::ProblemSpec& p) {
        return p.exact_solution.has_value();
      })
      .def("exact_solution", [](const gf::ProblemSpec& p, double t, double x) {
        if (!p.exact_solution) throw py::value_error("no exact solution");
        return (*p.exact_solution)(t, x);
      })
      .def("steady_state", [](const gf::ProblemSpec& p, double x) {
        if (!p.steady_state) throw py::value_error("no steady state");
        return (*p.steady_state)(x);
      });
  m.def(
      "example",
      [](int id, const std::string& variant, std::optional<double> nu,
         std::optional<double> mexp) {
        gf::ExampleOptions o;
        o.variant = variant;
        o.nu = nu;
        o.m = mexp;
        return gf::example(id, o);
      },
      py::arg("id"), py::arg("variant") = "", py::arg("nu") = py::none(),
      py::arg("m") = py::none());
  m.def("example_summaries", &gf::example_summaries);

  py::class_<gf::DGField>(m, "DGField")
      .def_property_readonly("n_cells", &gf::DGField::n_cells)
      .def_property_readonly("degree", &gf::DGField::degree)
      .def_property_readonly("coefficients", &coefficient_array)
      .def("evaluate", &gf::DGField::evaluate, py::arg("cell"), py::arg("xi"),
           py::arg("derivative_order") = 0)
      .def("evaluate_at", &gf::DGField::evaluate_at, py::arg("x"))
      .def("cell_average", [](const gf::DGField& f, int i) {
        return gf::cell_average(f, i);
      })
      .def("cell_averages", [](const gf::DGField& f) {
        std::vector<double> v(f.n_cells());
        for (int i = 0; i < f.n_cells(); ++i) v[i] = f.cell_average(i);
        return v;
      })
      .def("total_mass", &gf::DGField::total_mass)
      .def("cell_centers", [](const gf::DGField& f) { return f.mesh().centers; });

  py::class_<gf::DiagRecord>(m, "DiagRecord")
      .def_readonly("step", &gf::DiagRecord::step)
      .def_readonly("t", &gf::DiagRecord::t)
      .def_readonly("dt", &gf::DiagRecord::dt)
      .def_readonly("energy", &gf::DiagRecord::energy)
      .def_readonly("mass", &gf::DiagRecord::mass)
      .def_readonly("min_cell_avg", &gf::DiagRecord::min_cell_avg)
      .def_readonly("min_point", &gf::DiagRecord::min_point)
      .def_readonly("limited_cells", &gf::DiagRecord::limited_cells)
      .def_readonly("used_correction", &gf::DiagRecord::used_correction);

  py::class_<gf::RunResult>(m, "RunResult")
      .def_readonly("final_field", &gf::RunResult::final_field)
      .def_readonly("t", &gf::RunResult::t)
      .def_readonly("records", &gf::RunResult::records)
      .def_readonly("energy_violations", &gf::RunResult::energy_violations)
      .def_readonly("corrected_steps", &gf::RunResult::corrected_steps);

  py::register_exception<gf::SolverAbort>(m, "SolverAbort", PyExc_RuntimeError);

  py::class_<gf::Solver>(m, "Solver")
      .def(py::init<gf::ProblemSpec, gf::SchemeParams, int>(), py::arg("problem"),
           py::arg("params"), py::arg("n_cells"))
      .def("initial_state", &gf::Solver::initial_state)
      .def("project", &gf::Solver::project)
      .def("energy", [](const gf::Solver& s, const gf::DGField& rho) {
        return s.energy(rho);
      })
      .def("energy_flux", [](const gf::Solver& s, const gf::DGField& rho) {
        return s.energy_flux(rho);
      })
      .def("stable_dt",
           py::overload_cast<const gf::DGField&, double>(&gf::Solver::stable_dt,
                                                         py::const_),
           py::arg("rho"), py::arg("t") = 0.0)
      .def(
          "run",
          [](const gf::Solver& s, double t_final) {
            gf::RunOptions o;
            o.t_final = t_final;
            py::gil_scoped_release release;
            return s.run(o);
          },
          py::arg("t_final"));

  py::class_<gf::ErrorNorms>(m, "ErrorNorms")
      .def_readonly("l2", &gf::ErrorNorms::l2)
      .def_readonly("linf", &gf::ErrorNorms::linf);
  m.def("error_norms", &gf::error_norms, py::arg("rho"), py::arg("reference"));

  py::class_<gf::ConvergenceRow>(m, "ConvergenceRow")
      .def_readonly("n_cells", &gf::ConvergenceRow::n_cells)
      .def_readonly("l2_error", &gf::ConvergenceRow::l2_error)
      .def_readonly("l2_order", &gf::ConvergenceRow::l2_order)
      .def_readonly("linf_error", &gf::ConvergenceRow::linf_error)
      .def_readonly("linf_order", &gf::ConvergenceRow::linf_order);
  m.def("convergence_study", &gf::convergence_study, py::arg("problem"),
        py::arg("degree"), py::arg("n_list"), py::arg("t_final"),
        py::arg("params"), py::call_guard<py::gil_scoped_release>());

  py::class_<gf::LimiterReport>(m, "LimiterReport")
      .def_readonly("cells_modified", &gf::LimiterReport::cells_modified)
      .def_readonly("worst_min_before", &gf::LimiterReport::worst_min_before)
      .def_readonly("theta_min", &gf::LimiterReport::theta_min)
      .def_readonly("cells_failed", &gf::LimiterReport::cells_failed);
  m.def(
      "apply_limiter",
      [](const gf::DGField& f, double delta) {
        auto r = gf::apply_limiter(f, delta);
        return py::make_tuple(r.field, r.report);
      },
      py::arg("field"), py::arg("delta"));
  m.def("cell_min", &gf::cell_min, py::arg("field"), py::arg("cell"));

  m.def(
      "run_property_suite",
      [](std::uint64_t seed) {
        gf::VerifyOptions o;
        o.seed = seed;
        std::vector<py::tuple> out;
        for (const auto& r : gf::run_property_suite(o)) {
          out.push_back(py::make_tuple(r.module, r.name, r.passed, r.detail));
        }
        return out;
      },
      py::arg("seed") = 12345);
  m.def(
      "cli_main",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "gradflow");
        std::ostringstream out, err;
        const int code = gf::cli_main(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
