#include "gradflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "gradflow/basis.hpp"
#include "gradflow/convolution.hpp"
#include "gradflow/dg_field.hpp"
#include "gradflow/dg_operator.hpp"
#include "gradflow/diagnostics.hpp"
#include "gradflow/limiter.hpp"
#include "gradflow/mesh.hpp"
#include "gradflow/problem.hpp"
#include "gradflow/quadrature.hpp"
#include "gradflow/solver.hpp"

namespace gradflow {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

DGField random_field(const MeshPtr& mesh, int degree, std::mt19937_64& rng,
                     double avg_lo, double avg_hi, double spread) {
  std::uniform_real_distribution<double> avg(avg_lo, avg_hi);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DGField f(mesh, degree);
  const double sqrt_h = std::sqrt(mesh->h);
  for (int i = 0; i < f.n_cells(); ++i) {
    const double mean = avg(rng);
    f.coeff(i, 0) = mean * sqrt_h;
    for (int j = 1; j < f.modes(); ++j) f.coeff(i, j) = spread * mean * u(rng) * sqrt_h;
  }
  return f;
}

ProblemSpec constant_state_problem(double value) {
  return make_problem(InternalEnergy::entropy(), ConfinementPotential::zero(),
                      InteractionKernel::zero(), -1.0, 1.0,
                      BoundaryKind::zero_flux,
                      [value](double) { return value; });
}

class Suite {
 public:
  explicit Suite(const VerifyOptions& options) : options_(options) {}

  void check(const std::string& module, const std::string& name,
             const std::function<std::string(bool&)>& body) {
    PropertyResult r{module, name, false, {}};
    try {
      bool ok = true;
      r.detail = body(ok);
      r.passed = ok;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    if (options_.log) {
      *options_.log << (r.passed ? "PASS " : "FAIL ") << r.module << ": "
                    << r.name << " (" << r.detail << ")\n";
    }
    results_.push_back(std::move(r));
  }

  std::vector<PropertyResult> take() { return std::move(results_); }

 private:
  const VerifyOptions& options_;
  std::vector<PropertyResult> results_;
};

// Direct double loop over target and source cells, recomputing every moment.
ConvolutionValues naive_convolution(const InteractionKernel& kernel,
                                    const DGField& rho,
                                    const std::vector<double>& points) {
  const int n = rho.n_cells();
  const int np = static_cast<int>(points.size());
  ConvolutionValues out;
  out.points_per_cell = np;
  out.values.assign(static_cast<size_t>(n) * np, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int p = 0; p < np; ++p) {
      double s = 0.0;
      for (int m = 0; m < n; ++m) {
        for (int j = 0; j < rho.modes(); ++j) {
          s += kernel_moment(kernel, i - m, points[p], j, rho.mesh().h) *
               rho.coeff(m, j);
        }
      }
      out.values[i * np + p] = s;
    }
  }
  return out;
}

void mesh_basis_checks(Suite& s) {
  s.check("mesh-basis", "Gram matrix is the identity for k <= 6", [](bool& ok) {
    double worst = 0.0;
    for (int k = 0; k <= 6; ++k) {
      const auto g = gauss_legendre(k + 2);
      for (int a = 0; a <= k; ++a)
        for (int b = 0; b <= k; ++b) {
          double v = 0.0;
          for (int q = 0; q < g.size(); ++q)
            v += 0.5 * g.weights[q] * scaled_legendre(a, g.nodes[q]) *
                 scaled_legendre(b, g.nodes[q]);
          worst = std::max(worst, std::abs(v - (a == b ? 1.0 : 0.0)));
        }
    }
    ok = worst <= 1e-13;
    return "max deviation " + fmt(worst);
  });
  s.check("mesh-basis", "Lobatto sum equals the cell average", [&](bool& ok) {
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int k = 0; k <= 6; ++k) {
      const Basis basis(k);
      const auto mesh = build_mesh(-1.0, 2.0, 5);
      const auto f = random_field(mesh, k, rng, 0.1, 2.0, 0.5);
      const auto w = basis.lobatto_average_weights();
      for (int i = 0; i < f.n_cells(); ++i) {
        double v = 0.0;
        for (int m = 0; m < basis.lobatto().size(); ++m)
          v += w[m] * f.evaluate(i, basis.lobatto().nodes[m]);
        worst = std::max(worst, std::abs(v - f.cell_average(i)));
      }
    }
    ok = worst <= 1e-13;
    return "max deviation " + fmt(worst);
  });
  s.check("mesh-basis", "projection is idempotent", [](bool& ok) {
    const Basis basis(3);
    const auto mesh = build_mesh(-M_PI, M_PI, 16);
    const auto f = project_l2([](double x) { return 2.0 + std::sin(x); }, mesh, basis);
    const auto g = project_l2([&](double x) { return f.evaluate_at(x); }, mesh, basis);
    // evaluate_at picks the right cell at interfaces, which Gauss nodes avoid.
    double worst = 0.0;
    for (size_t n = 0; n < f.coeffs().size(); ++n)
      worst = std::max(worst, std::abs(f.coeffs()[n] - g.coeffs()[n]));
    ok = worst <= 1e-13;
    return "max coefficient change " + fmt(worst);
  });
}

void problem_checks(Suite& s) {
  s.check("problem-catalog", "H' matches finite differences of H", [](bool& ok) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(1e-3, 10.0);
    double worst = 0.0;
    for (const auto& h : {InternalEnergy::entropy(), InternalEnergy::power(0.25, 3.0),
                          InternalEnergy::power(2.0, 2.0)}) {
      for (int n = 0; n < 20; ++n) {
        const double r = u(rng), e = 1e-5;
        const double fd = (h.h(r + e) - h.h(r - e)) / (2 * e);
        worst = std::max(worst, std::abs(h.h_prime(r) - fd));
        if (h.h_double_prime(r) < 0.0) ok = false;
      }
    }
    ok = ok && worst <= 1e-6;
    return "max deviation " + fmt(worst);
  });
  s.check("problem-catalog", "kernels are symmetric", [](bool& ok) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    for (const auto& w : {InteractionKernel::attractive_repulsive(),
                          InteractionKernel::compact_tent(),
                          InteractionKernel::gaussian()}) {
      for (int n = 0; n < 20; ++n) {
        const double x = u(rng);
        if (w.w(x) != w.w(-x)) ok = false;
      }
    }
    return ok ? "W(x) == W(-x) at 60 points" : "asymmetric kernel";
  });
  s.check("problem-catalog", "beta0 = 5.434 exceeds the lower bound for k <= 3",
          [](bool& ok) {
            const auto p = default_params();
            double worst = std::numeric_limits<double>::infinity();
            for (int k = 1; k <= 3; ++k)
              worst = std::min(worst, p.beta0 - beta0_lower_bound(k, p.beta1));
            ok = worst > 0.0;
            return "smallest margin " + fmt(worst);
          });
}

void convolution_checks(Suite& s) {
  s.check("nonlocal-convolution", "table contraction equals the naive double loop",
          [](bool& ok) {
            std::mt19937_64 rng(17);
            int mismatches = 0;
            for (const auto& w : {InteractionKernel::attractive_repulsive(),
                                  InteractionKernel::compact_tent(),
                                  InteractionKernel::gaussian()}) {
              const Basis basis(2);
              const auto mesh = build_mesh(-3.0, 3.0, 16);
              const auto table = build_moment_table(w, mesh, basis);
              const auto rho = random_field(mesh, 2, rng, 0.1, 1.0, 0.5);
              const std::vector<double> pts(table.eval_points().begin(),
                                            table.eval_points().end());
              const auto fast = convolve(table, rho);
              const auto slow = naive_convolution(w, rho, pts);
              for (size_t n = 0; n < fast.values.size(); ++n)
                if (fast.values[n] != slow.values[n]) ++mismatches;
            }
            ok = mismatches == 0;
            return std::to_string(mismatches) + " values differ";
          });
  s.check("nonlocal-convolution", "convolution is linear", [](bool& ok) {
    std::mt19937_64 rng(19);
    const Basis basis(2);
    const auto mesh = build_mesh(-3.0, 3.0, 12);
    const auto table = build_moment_table(InteractionKernel::gaussian(), mesh, basis);
    const auto r1 = random_field(mesh, 2, rng, 0.1, 1.0, 0.5);
    const auto r2 = random_field(mesh, 2, rng, 0.1, 1.0, 0.5);
    auto combo = r2;
    combo.axpy(0.7, r1);
    const auto c1 = convolve(table, r1), c2 = convolve(table, r2),
               cc = convolve(table, combo);
    double worst = 0.0;
    for (size_t n = 0; n < cc.values.size(); ++n)
      worst = std::max(worst, std::abs(cc.values[n] - 0.7 * c1.values[n] - c2.values[n]));
    ok = worst <= 1e-13;
    return "max deviation " + fmt(worst);
  });
}

void operator_checks(Suite& s) {
  s.check("dg-operator", "rhs conserves mass", [](bool& ok) {
    std::mt19937_64 rng(23);
    double worst = 0.0;
    for (int id : {1, 2, 3, 4, 5, 6}) {
      const auto p = example(id);
      const Basis basis(2);
      const auto mesh = build_mesh(p.a, p.b, 12);
      auto params = default_params();
      const auto rho = random_field(mesh, 2, rng, 0.2, 1.0, 0.1);
      const auto q = random_field(mesh, 2, rng, -1.0, 1.0, 2.0);
      for (auto mode : {FluxMode::plain, FluxMode::corrected}) {
        const auto r = assemble_rhs(rho, q, p, basis, params, mode);
        double sum = 0.0, scale = 0.0;
        for (int i = 0; i < r.n_cells(); ++i) {
          sum += mesh->h * r.cell_average(i);
          scale += mesh->h * std::abs(r.cell_average(i));
        }
        worst = std::max(worst, std::abs(sum) / std::max(1.0, scale));
      }
    }
    ok = worst <= 1e-12;
    return "max relative mass rate " + fmt(worst);
  });
  s.check("dg-operator", "constant states have zero rhs", [](bool& ok) {
    const auto p = constant_state_problem(1.5);
    const Basis basis(3);
    const auto mesh = build_mesh(p.a, p.b, 16);
    const auto rho = project_l2([](double) { return 1.5; }, mesh, basis);
    const auto q = compute_energy_flux(rho, p, basis, nullptr);
    double worst = 0.0;
    for (auto mode : {FluxMode::plain, FluxMode::corrected}) {
      const auto r = assemble_rhs(rho, q, p, basis, default_params(), mode);
      for (double c : r.coeffs()) worst = std::max(worst, std::abs(c));
    }
    ok = worst <= 1e-13;
    return "max |rhs| " + fmt(worst);
  });
  s.check("dg-operator", "energy norm matches a direct loop", [](bool& ok) {
    std::mt19937_64 rng(29);
    const int k = 2;
    const Basis basis(k);
    const auto mesh = build_mesh(0.0, 1.0, 8);
    const auto rho = random_field(mesh, k, rng, 0.2, 1.0, 0.3);
    const auto q = random_field(mesh, k, rng, -1.0, 1.0, 2.0);
    const auto g = gauss_legendre(2 * k + 2);
    double sum = 0.0;
    for (int i = 0; i < mesh->n_cells; ++i)
      for (int n = 0; n < g.size(); ++n) {
        const double dq = q.evaluate(i, g.nodes[n], 1);
        sum += 0.5 * mesh->h * g.weights[n] * rho.evaluate(i, g.nodes[n]) * dq * dq;
      }
    for (int f = 1; f < mesh->n_cells; ++f) {
      const double jq = q.evaluate(f, -1.0) - q.evaluate(f - 1, 1.0);
      const double mr = 0.5 * (rho.evaluate(f, -1.0) + rho.evaluate(f - 1, 1.0));
      sum += mr * jq * jq / mesh->h;
    }
    const double direct = std::sqrt(sum);
    const double fast = energy_norm(q, rho, basis);
    const double err = std::abs(fast - direct) / direct;
    ok = err <= 1e-13;
    return "relative deviation " + fmt(err);
  });
}

void limiter_checks(Suite& s, const VerifyOptions& o) {
  s.check("limiter", "mean preservation, min enforcement, idempotence",
          [&](bool& ok) {
            const auto st = limiter_property_stats(o.limiter_cells, o.seed);
            ok = st.max_mean_change <= 1e-15 && st.min_excess >= -1e-14 &&
                 st.idempotence_failures == 0;
            return std::to_string(st.cells) + " cells, mean change " +
                   fmt(st.max_mean_change) + ", min - delta " +
                   fmt(st.min_excess) + ", idempotence failures " +
                   std::to_string(st.idempotence_failures);
          });
}

void integrator_checks(Suite& s, const VerifyOptions& o) {
  s.check("time-integrator", "cfl_dt hand example", [](bool& ok) {
    auto p = default_params();
    const double dt = cfl_dt(10.0, 0.1, 1.0 / 6.0, p);
    ok = std::abs(dt - 0.0015) <= 1e-16 && cfl_dt(0.0, 0.1, 1.0 / 6.0, p) == 0.1 * 0.1;
    return "dt = " + fmt(dt);
  });
  s.check("time-integrator", "constant state is a bit-exact fixed point",
          [](bool& ok) {
            for (auto integrator : {Integrator::euler, Integrator::rk3}) {
              auto params = default_params();
              params.integrator = integrator;
              const Solver solver(constant_state_problem(1.5), params, 16);
              const auto start = solver.initial_state();
              auto rho = start;
              double t = 0.0;
              for (int n = 0; n < 100; ++n) {
                const double dt = solver.stable_dt(rho, t);
                rho = solver.step(rho, dt, t).new_field;
                t += dt;
              }
              if (rho.coeffs() != start.coeffs()) ok = false;
            }
            return ok ? "100 steps, Euler and RK3" : "state changed";
          });
  s.check("time-integrator", "corrected Euler keeps averages positive",
          [&](bool& ok) {
            const auto st = positivity_stress_test(o.stress_trials, o.seed);
            ok = st.positive == st.trials;
            return std::to_string(st.positive) + "/" + std::to_string(st.trials) +
                   " trials positive";
          });
  struct Short {
    int id;
    double t;
  };
  for (const Short c : {Short{2, 0.2}, Short{3, 0.5}, Short{4, 0.5},
                        Short{5, 1.0}, Short{6, 0.1}}) {
    s.check("time-integrator",
            "example " + std::to_string(c.id) + ": mass and energy at N=32",
            [c](bool& ok) {
              auto params = default_params();
              params.degree = 2;
              const Solver solver(example(c.id), params, 32);
              RunOptions ro;
              ro.t_final = c.t;
              const auto r = solver.run(ro);
              const double m0 = r.records.front().mass;
              const double dm = std::abs(r.records.back().mass - m0) / m0;
              double min_avg = std::numeric_limits<double>::infinity();
              for (const auto& rec : r.records) min_avg = std::min(min_avg, rec.min_cell_avg);
              ok = dm <= 1e-10 && r.energy_violations == 0 && min_avg > 0.0;
              return std::to_string(r.records.size() - 1) + " steps, mass drift " +
                     fmt(dm) + ", energy violations " +
                     std::to_string(r.energy_violations) + ", min average " +
                     fmt(min_avg);
            });
  }
}

void io_checks(Suite& s) {
  s.check("diagnostics-io", "CSV round trip is exact", [](bool& ok) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<DiagRecord> recs(5);
    std::vector<ConvergenceRow> rows(3);
    for (int n = 0; n < 5; ++n) {
      recs[n] = {n, u(rng), u(rng) * 1e-7, u(rng), M_PI * u(rng), 1e-300 * u(rng),
                 u(rng), n * 3, n % 2 == 1};
    }
    for (int n = 0; n < 3; ++n) {
      rows[n].n_cells = 16 << n;
      rows[n].l2_error = std::abs(u(rng)) * std::pow(10.0, -3 * n);
      rows[n].linf_error = std::abs(u(rng)) * std::pow(10.0, -3 * n);
    }
    fill_orders(rows);
    const auto dir = std::filesystem::temp_directory_path() /
                     ("gradflow_verify_" + std::to_string(rng()));
    std::filesystem::create_directories(dir);
    emit_timeseries(dir / "timeseries.csv", recs);
    emit_convergence(dir / "convergence.csv", rows);
    const auto recs2 = read_timeseries(dir / "timeseries.csv");
    const auto rows2 = read_convergence(dir / "convergence.csv");
    std::filesystem::remove_all(dir);
    ok = recs2.size() == recs.size() && rows2.size() == rows.size();
    for (size_t n = 0; ok && n < recs.size(); ++n) {
      const auto &a = recs[n], &b = recs2[n];
      ok = a.step == b.step && a.t == b.t && a.dt == b.dt && a.energy == b.energy &&
           a.mass == b.mass && a.min_cell_avg == b.min_cell_avg &&
           a.min_point == b.min_point && a.limited_cells == b.limited_cells &&
           a.used_correction == b.used_correction;
    }
    for (size_t n = 0; ok && n < rows.size(); ++n) {
      ok = rows[n].l2_error == rows2[n].l2_error &&
           rows[n].l2_order == rows2[n].l2_order &&
           rows[n].linf_order == rows2[n].linf_order;
    }
    return ok ? "timeseries and convergence tables identical" : "mismatch";
  });
}

}  // namespace

LimiterStats limiter_property_stats(int n_cells, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> deg(1, 4);
  std::uniform_real_distribution<double> log_delta(-14.0, -2.0);
  std::uniform_real_distribution<double> spread(0.0, 4.0);
  LimiterStats st;
  st.min_excess = std::numeric_limits<double>::infinity();
  const int per_field = 100;
  while (st.cells < n_cells) {
    const int cells = std::min(per_field, std::max(2, n_cells - st.cells));
    const int k = deg(rng);
    const double delta = std::pow(10.0, log_delta(rng));
    const auto mesh = build_mesh(0.0, 1.0, cells);
    const auto f = random_field(mesh, k, rng, delta, 2.0, spread(rng));
    const auto once = apply_limiter(f, delta);
    const auto twice = apply_limiter(once.field, delta);
    if (twice.report.cells_modified != 0 ||
        twice.field.coeffs() != once.field.coeffs()) {
      ++st.idempotence_failures;
    }
    for (int i = 0; i < cells; ++i) {
      const double before = f.cell_average(i);
      st.max_mean_change = std::max(
          st.max_mean_change,
          std::abs(once.field.cell_average(i) - before) / std::abs(before));
      st.min_excess = std::min(st.min_excess, cell_min(once.field, i) - delta);
    }
    st.cells += cells;
  }
  return st;
}

StressStats positivity_stress_test(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> deg(1, 4);
  std::uniform_int_distribution<int> cells(4, 24);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  StressStats st;
  st.worst_ratio = std::numeric_limits<double>::infinity();
  const auto problem = constant_state_problem(1.0);
  for (int trial = 0; trial < trials; ++trial) {
    const int k = deg(rng);
    const int n = cells(rng);
    auto params = default_params();
    params.degree = k;
    const Basis basis(k);
    const auto mesh = build_mesh(-1.0, 1.0, n);
    // Averages span many decades; one cell sits just above delta.
    DGField rho(mesh, k);
    const double sqrt_h = std::sqrt(mesh->h);
    for (int i = 0; i < n; ++i) {
      const double mean = std::pow(10.0, -10.0 * u(rng));
      rho.coeff(i, 0) = mean * sqrt_h;
      for (int j = 1; j <= k; ++j) rho.coeff(i, j) = 3.0 * mean * (u(rng) - 0.5) * sqrt_h;
    }
    const int thin = static_cast<int>(u(rng) * n) % n;
    rho.coeff(thin, 0) = params.delta * (1.0 + u(rng)) * sqrt_h;
    rho = apply_limiter(rho, params.delta).field;
    // Steep energy flux unrelated to rho.
    const double steep = std::pow(10.0, 4.0 * u(rng));
    DGField q(mesh, k);
    for (double& c : q.coeffs()) c = steep * (2.0 * u(rng) - 1.0);
    const auto fluxes = interface_fluxes(rho, q, problem, params);
    const double dt = cfl_dt(fluxes, mesh->h, basis.omega1(), params);
    auto next = rho;
    next.axpy(dt, assemble_rhs(rho, q, fluxes, problem, basis, FluxMode::corrected));
    double old_min = std::numeric_limits<double>::infinity();
    double new_min = old_min;
    for (int i = 0; i < n; ++i) {
      old_min = std::min(old_min, rho.cell_average(i));
      new_min = std::min(new_min, next.cell_average(i));
    }
    ++st.trials;
    if (new_min > 0.0) ++st.positive;
    st.worst_ratio = std::min(st.worst_ratio, new_min / old_min);
  }
  return st;
}

std::vector<PropertyResult> run_property_suite(const VerifyOptions& options) {
  Suite s(options);
  mesh_basis_checks(s);
  problem_checks(s);
  convolution_checks(s);
  operator_checks(s);
  limiter_checks(s, options);
  integrator_checks(s, options);
  io_checks(s);
  return s.take();
}

}  // namespace gradflow
