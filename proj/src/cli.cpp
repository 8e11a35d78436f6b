#include "gradflow/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "gradflow/config.hpp"
#include "gradflow/diagnostics.hpp"
#include "gradflow/problem.hpp"
#include "gradflow/solver.hpp"
#include "gradflow/verify.hpp"

namespace gradflow {

namespace {

// Raw command-line values; applied on top of the config file so that flags
// win over file entries.
struct Overrides {
  std::string config;
  std::optional<std::string> example, n, k, t_final, integrator, out, variant,
      nu, m, snapshots, seed;
  bool strict_energy = false;
};

void add_common(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config, "key = value configuration file");
  cmd.add_option("--example", o.example, "catalog example 1..6");
  cmd.add_option("--variant", o.variant, "initial datum variant (a2, a3, centered, shifted)");
  cmd.add_option("--nu", o.nu, "diffusion coefficient of H = (nu/m) rho^m");
  cmd.add_option("--m", o.m, "exponent of H = (nu/m) rho^m");
  cmd.add_option("--k", o.k, "polynomial degree");
  cmd.add_option("--t-final", o.t_final, "final time");
  cmd.add_option("--integrator", o.integrator, "euler or rk3");
  cmd.add_option("--out", o.out, "output directory (default $GRADFLOW_OUT)");
  cmd.add_flag("--strict-energy", o.strict_energy,
               "halve the step and retry when the energy increases");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  auto set = [&](const char* key, const std::optional<std::string>& v) {
    if (v) apply_config_entry(c, key, *v);
  };
  if (o.example) c.custom.reset();
  set("example", o.example);
  set("variant", o.variant);
  set("nu", o.nu);
  set("m", o.m);
  set("N", o.n);
  set("k", o.k);
  set("t_final", o.t_final);
  set("integrator", o.integrator);
  set("out", o.out);
  set("snapshot_times", o.snapshots);
  set("seed", o.seed);
  if (o.strict_energy) c.params.strict_energy = true;
  if (!c.example && !c.custom) c.example = 1;
  validate_config(c);
  return c;
}

std::filesystem::path output_dir(const RunConfig& c) {
  std::string dir = c.out_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("GRADFLOW_OUT"); env && *env) dir = env;
  }
  if (dir.empty()) dir = "gradflow_out";
  std::filesystem::create_directories(dir);
  return dir;
}

int cmd_run(const Overrides& o, std::ostream& out, std::ostream& err) {
  const RunConfig c = resolve(o);
  const ProblemSpec problem = build_problem(c);
  const SchemeParams params = resolved_params(c, problem);
  const int n = resolved_cells(c, problem);
  const Solver solver(problem, params, n);
  const auto dir = output_dir(c);
  RunOptions ro;
  ro.t_final = resolved_t_final(c, problem);
  ro.snapshot_times = c.snapshot_times;
  ro.on_snapshot = [&](double t, const DGField& rho, const DGField& q) {
    emit_snapshot(dir / snapshot_filename(t), rho, q, solver.basis());
  };
  out << "problem " << problem.name << ", N = " << n << ", k = " << params.degree
      << ", t_final = " << ro.t_final << "\n";
  if (params.degree >= 1 &&
      !(params.beta0 > beta0_lower_bound(params.degree, params.beta1))) {
    err << "warning: beta0 = " << params.beta0 << " is not above the stability bound "
        << beta0_lower_bound(params.degree, params.beta1) << "\n";
  }
  const double h = solver.mesh()->h;
  if (params.delta >= std::pow(h, params.degree + 1)) {
    err << "warning: delta = " << params.delta << " is not below h^(k+1) = "
        << std::pow(h, params.degree + 1) << "\n";
  }
  RunResult result;
  try {
    result = solver.run(ro);
  } catch (const SolverAbort& e) {
    const auto dump = dir / "abort_state.csv";
    emit_snapshot(dump, e.state, solver.energy_flux(e.state), solver.basis());
    err << "solver abort at step " << e.step << ", t = " << e.t << ": "
        << e.what() << "\nstate written to " << dump.string() << "\n";
    return kExitFailure;
  }
  emit_timeseries(dir / "timeseries.csv", result.records);
  const auto& first = result.records.front();
  const auto& last = result.records.back();
  out << "steps " << last.step << ", t = " << result.t << "\n"
      << std::setprecision(12) << "energy " << first.energy << " -> " << last.energy
      << "\nmass " << first.mass << " -> " << last.mass << "\n"
      << std::setprecision(6) << "energy violations " << result.energy_violations
      << ", corrected steps " << result.corrected_steps << "\n";
  if (problem.exact_solution) {
    const auto e = error_norms(result.final_field, [&](double x) {
      return (*problem.exact_solution)(result.t, x);
    });
    out << "error vs exact: L2 " << e.l2 << ", Linf " << e.linf << "\n";
  }
  if (problem.steady_state) {
    const auto e = error_norms(result.final_field, *problem.steady_state);
    out << "distance to steady state: L2 " << e.l2 << ", Linf " << e.linf << "\n";
  }
  out << "output in " << dir.string() << "\n";
  return kExitOk;
}

std::vector<int> parse_n_list(const std::string& text) {
  std::vector<int> list;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    const int v = std::stoi(item, &used);
    if (used != item.size()) throw ConfigError("bad mesh list entry '" + item + "'");
    list.push_back(v);
  }
  return list;
}

int cmd_converge(const Overrides& o, const std::string& n_list,
                 std::ostream& out) {
  const RunConfig c = resolve(o);
  const ProblemSpec problem = build_problem(c);
  const SchemeParams params = resolved_params(c, problem);
  const auto list = parse_n_list(n_list);
  const auto rows = convergence_study(problem, params.degree, list,
                                      resolved_t_final(c, problem), params);
  const auto dir = output_dir(c);
  emit_convergence(dir / "convergence.csv", rows);
  out << "   N      L2 error  order    Linf error  order\n";
  for (const auto& r : rows) {
    out << std::setw(4) << r.n_cells << "  " << std::scientific
        << std::setprecision(3) << r.l2_error << "  ";
    if (r.l2_order) out << std::fixed << std::setprecision(3) << *r.l2_order;
    else out << "   --";
    out << "  " << std::scientific << std::setprecision(3) << r.linf_error << "  ";
    if (r.linf_order) out << std::fixed << std::setprecision(3) << *r.linf_order;
    else out << "   --";
    out << "\n";
  }
  out << std::defaultfloat << "output in " << dir.string() << "\n";
  return kExitOk;
}

int cmd_verify(std::uint64_t seed, std::ostream& out) {
  VerifyOptions vo;
  vo.seed = seed;
  vo.log = &out;
  int failed = 0;
  for (const auto& r : run_property_suite(vo)) failed += r.passed ? 0 : 1;
  out << (failed == 0 ? "all properties hold" :
                        std::to_string(failed) + " properties failed") << "\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Discontinuous Galerkin solver for nonlinear nonlocal "
               "Fokker-Planck equations"};
  app.require_subcommand(1);
  Overrides run_o, conv_o;
  auto* run = app.add_subcommand("run", "run one simulation");
  add_common(*run, run_o);
  run->add_option("--N", run_o.n, "number of cells");
  run->add_option("--snapshots", run_o.snapshots, "comma-separated snapshot times");

  auto* converge = app.add_subcommand("converge", "mesh refinement study");
  add_common(*converge, conv_o);
  std::string n_list = "16,32,64,128";
  converge->add_option("--N-list", n_list, "comma-separated increasing mesh sizes");

  app.add_subcommand("examples", "list the example catalog");
  auto* verify = app.add_subcommand("verify", "run the property suite");
  std::uint64_t seed = 12345;
  verify->add_option("--seed", seed, "random seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_o, out, err);
    if (converge->parsed()) return cmd_converge(conv_o, n_list, out);
    if (verify->parsed()) return cmd_verify(seed, out);
    const auto summaries = example_summaries();
    for (const auto& line : summaries) out << line << "\n";
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int cli_main(int argc, const char* const* argv) {
  return cli_main(std::vector<std::string>(argv, argv + argc), std::cout,
                  std::cerr);
}

}  // namespace gradflow
