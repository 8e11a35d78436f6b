#include "gradflow/solver.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

namespace gradflow {

namespace {

// Flux magnitudes below this count as zero in the CFL.
constexpr double kFluxFloor = 1e-14;
// -x is in the SSP-RK3 stability region for 0 <= x <= 2.5127...
constexpr double kRk3StabilityInterval = 2.5127453266;
// Attempts at shrinking dt to the stage CFL before giving up.
constexpr int kCflRestarts = 30;

// Internal signal: a corrected stage failed with dt above its own CFL.
struct StageCflExceeded {
  double stage_cfl;
};

double min_average(const DGField& f) {
  double lo = std::numeric_limits<double>::infinity();
  const double inv = 1.0 / std::sqrt(f.mesh().h);
  for (int i = 0; i < f.n_cells(); ++i) lo = std::min(lo, f.coeff(i, 0) * inv);
  return lo;
}

int first_nonpositive_average(const DGField& f) {
  for (int i = 0; i < f.n_cells(); ++i) {
    if (!(f.coeff(i, 0) > 0.0)) return i;
  }
  return -1;
}

// Densities below this are vacuum. Draining cells decay geometrically, and
// once their averages reach the subnormal range the positivity certificate
// no longer survives rounding (and arithmetic slows down sharply). Keeping
// vacuum at this level leaves every derived product in the normal range.
constexpr double kVacuumDensity = 1e-200;

// Resets cells whose average lies below kVacuumDensity (and, when
// allow_negative, above -kVacuumDensity) to the constant kVacuumDensity.
// Returns the number of cells reset.
int apply_vacuum_floor(DGField& f, bool allow_negative) {
  const double level = kVacuumDensity * std::sqrt(f.mesh().h);
  int count = 0;
  for (int i = 0; i < f.n_cells(); ++i) {
    const double c0 = f.coeff(i, 0);
    if (c0 >= level || (!allow_negative && !(c0 > 0.0)) || c0 <= -level) {
      continue;
    }
    auto c = f.cell(i);
    std::fill(c.begin(), c.end(), 0.0);
    c[0] = level;
    ++count;
  }
  return count;
}

// base + w * (other - base); equals base bit-for-bit when other == base.
DGField blend(const DGField& base, const DGField& other, double w) {
  DGField out = base;
  auto& o = out.coeffs();
  const auto& b = base.coeffs();
  const auto& x = other.coeffs();
  for (size_t n = 0; n < o.size(); ++n) o[n] = b[n] + w * (x[n] - b[n]);
  return out;
}

void merge_report(LimiterReport& into, const LimiterReport& r) {
  into.cells_modified += r.cells_modified;
  into.worst_min_before = std::min(into.worst_min_before, r.worst_min_before);
  into.theta_min = std::min(into.theta_min, r.theta_min);
  into.cells_failed = r.cells_failed;
}

}  // namespace

double cfl_dt(double max_abs_flux, double h, double omega1,
              const SchemeParams& params) {
  const double cap = params.cap_coef * h * h;
  if (!(max_abs_flux >= kFluxFloor)) return cap;
  return std::min(params.safety * omega1 * h / max_abs_flux, cap);
}

double cfl_dt(const std::vector<InterfaceFluxData>& fluxes, double h,
              double omega1, const SchemeParams& params) {
  double m = 0.0;
  for (const auto& d : fluxes) m = std::max(m, std::abs(d.ddg_flux));
  return cfl_dt(m, h, omega1, params);
}

double ddg_laplacian_spectral_radius(const SchemeParams& params) {
  using Key = std::tuple<int, double, double, int>;
  static std::mutex mu;
  static std::map<Key, double> cache;
  const Key key{params.degree, params.beta0, params.beta1, params.gauss_points};
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  // rho = 1 turns the scheme into the DDG Laplacian acting on q. With h = 1
  // the spectral radius is already scaled by h^2.
  constexpr int kCells = 16;
  const auto mesh = build_mesh(0.0, kCells, kCells);
  const Basis basis(params.degree, params.gauss_points, params.lobatto_points);
  ProblemSpec laplace;
  laplace.a = 0.0;
  laplace.b = kCells;
  laplace.bc = BoundaryKind::periodic;
  DGField rho(mesh, params.degree);
  for (int i = 0; i < kCells; ++i) rho.coeff(i, 0) = 1.0;
  const int dim = kCells * basis.size();
  Eigen::MatrixXd op(dim, dim);
  DGField q(mesh, params.degree);
  for (int c = 0; c < dim; ++c) {
    std::fill(q.coeffs().begin(), q.coeffs().end(), 0.0);
    q.coeffs()[c] = 1.0;
    const auto col =
        assemble_rhs(rho, q, laplace, basis, params, FluxMode::plain);
    for (int r = 0; r < dim; ++r) op(r, c) = col.coeffs()[r];
  }
  const Eigen::EigenSolver<Eigen::MatrixXd> eig(op, false);
  double radius = 0.0;
  for (const auto& z : eig.eigenvalues()) radius = std::max(radius, std::abs(z));
  std::lock_guard<std::mutex> lock(mu);
  cache[key] = radius;
  return radius;
}

Solver::Solver(ProblemSpec problem, SchemeParams params, int n_cells)
    : problem_(std::move(problem)), params_(params) {
  if (params_.degree < 0) {
    throw std::invalid_argument("Solver: degree must be >= 0");
  }
  for (double v : {params_.beta0, params_.beta1, params_.delta, params_.safety,
                   params_.cap_coef, params_.diffusive_safety,
                   params_.fixed_dt}) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("Solver: scheme parameters must be finite");
    }
  }
  if (params_.delta < 0.0 || params_.safety <= 0.0 || params_.cap_coef <= 0.0) {
    throw std::invalid_argument(
        "Solver: delta must be >= 0, safety and cap_coef > 0");
  }
  validate_problem(problem_);
  mesh_ = build_mesh(problem_.a, problem_.b, n_cells);
  basis_ = std::make_shared<const Basis>(params_.degree, params_.gauss_points,
                                         params_.lobatto_points);
  moments_ = build_moment_table(problem_.kernel, mesh_, *basis_);
  if (!problem_.internal_energy.is_zero() && params_.degree >= 0) {
    laplacian_radius_ = ddg_laplacian_spectral_radius(params_);
  }
}

DGField Solver::project(const std::function<double(double)>& f) const {
  return project_l2(f, mesh_, *basis_);
}

LimiterResult Solver::limit(const DGField& rho) const {
  return apply_limiter(rho, params_.delta, SubDeltaPolicy::flatten);
}

DGField Solver::initial_state() const {
  DGField rho = project(problem_.initial_datum);
  if (min_average(rho) < params_.delta) {
    const double lift = params_.delta * std::sqrt(mesh_->h);
    for (int i = 0; i < rho.n_cells(); ++i) rho.coeff(i, 0) += lift;
  }
  return apply_limiter(rho, params_.delta, SubDeltaPolicy::strict).field;
}

ConvolutionValues Solver::convolution(const DGField& rho) const {
  if (moments_.is_zero()) return {};
  return convolve(moments_, rho);
}

DGField Solver::energy_flux(const DGField& rho,
                            const ConvolutionValues* conv) const {
  if (conv == nullptr && !moments_.is_zero()) {
    const auto c = convolution(rho);
    return compute_energy_flux(rho, problem_, *basis_, &c);
  }
  return compute_energy_flux(rho, problem_, *basis_, conv);
}

double Solver::energy(const DGField& rho, const ConvolutionValues* conv) const {
  if (conv == nullptr && !moments_.is_zero()) {
    const auto c = convolution(rho);
    return discrete_energy(rho, problem_, *basis_, &c);
  }
  return discrete_energy(rho, problem_, *basis_, conv);
}

DGField Solver::rhs(const DGField& rho, FluxMode mode, double t) const {
  const auto conv = convolution(rho);
  const auto q = energy_flux(rho, &conv);
  return assemble_rhs(rho, q, problem_, *basis_, params_, mode, t, &conv);
}

double Solver::cfl_dt(const DGField& rho, double t) const {
  const auto conv = convolution(rho);
  const auto q = energy_flux(rho, &conv);
  return gradflow::cfl_dt(interface_fluxes(rho, q, problem_, params_, t, &conv),
                          mesh_->h, basis_->omega1(), params_);
}

double Solver::diffusion_max(const DGField& rho) const {
  if (problem_.internal_energy.is_zero()) return 0.0;
  const auto& hpp = problem_.internal_energy.h_double_prime;
  const auto& g = basis_->gauss();
  const double inv = 1.0 / std::sqrt(mesh_->h);
  double d = 0.0;
  for (int i = 0; i < rho.n_cells(); ++i) {
    const auto c = rho.cell(i);
    auto visit = [&](double r) {
      if (r > 0.0) d = std::max(d, r * hpp(r));
    };
    for (int n = 0; n < g.size(); ++n) {
      double r = 0.0;
      for (int j = 0; j < basis_->size(); ++j) r += c[j] * basis_->at_gauss(n, j);
      visit(r * inv);
    }
    for (int side = 0; side < 2; ++side) {
      double r = 0.0;
      for (int j = 0; j < basis_->size(); ++j) r += c[j] * basis_->at_end(side, j);
      visit(r * inv);
    }
  }
  return d;
}

Solver::Eval Solver::evaluate(const DGField& rho, bool with_energy) const {
  Eval ev;
  ev.conv = convolution(rho);
  ev.q = compute_energy_flux(rho, problem_, *basis_, &ev.conv);
  if (with_energy) ev.energy = discrete_energy(rho, problem_, *basis_, &ev.conv);
  return ev;
}

double Solver::stable_dt(const DGField& rho, const Eval& ev, double t) const {
  if (params_.fixed_dt > 0.0) return params_.fixed_dt;
  double dt = gradflow::cfl_dt(
      interface_fluxes(rho, ev.q, problem_, params_, t, &ev.conv), mesh_->h,
      basis_->omega1(), params_);
  const double d = diffusion_max(rho);
  if (d > 0.0 && laplacian_radius_ > 0.0) {
    // Real-axis extent of the absolute stability region.
    const double interval =
        params_.integrator == Integrator::euler ? 2.0 : kRk3StabilityInterval;
    const double h = mesh_->h;
    dt = std::min(dt, params_.diffusive_safety * interval * h * h /
                          (laplacian_radius_ * d));
  }
  return dt;
}

double Solver::stable_dt(const DGField& rho, double t) const {
  if (params_.fixed_dt > 0.0) return params_.fixed_dt;
  return stable_dt(rho, evaluate(rho), t);
}

StepOutcome Solver::euler_step(const DGField& rho, double dt, FluxMode mode,
                               double t) const {
  const auto ev = evaluate(rho);
  StepOutcome out;
  out.energy_before = ev.energy;
  out.mass_before = rho.total_mass();
  out.new_field = rho;
  out.new_field.axpy(dt, assemble_rhs(rho, ev.q, problem_, *basis_, params_,
                                      mode, t, &ev.conv));
  out.dt_used = dt;
  out.used_correction = mode == FluxMode::corrected;
  out.mass_after = out.new_field.total_mass();
  try {
    out.energy_after = energy(out.new_field);
  } catch (const NonPositiveDensity&) {
    // An unlimited Euler step may leave the domain of H.
    out.energy_after = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

Solver::Stage Solver::hybrid_stage(const DGField& u, const Eval& ev, double dt,
                                   double t) const {
  const auto fluxes = interface_fluxes(u, ev.q, problem_, params_, t, &ev.conv);
  Stage r;
  r.field = u;
  r.field.axpy(dt, assemble_rhs(u, ev.q, fluxes, problem_, *basis_,
                                FluxMode::plain));
  if (first_nonpositive_average(r.field) < 0) {
    r.vacuum_resets = apply_vacuum_floor(r.field, false);
    return r;
  }

  r.used_correction = true;
  r.field = u;
  r.field.axpy(dt, assemble_rhs(u, ev.q, fluxes, problem_, *basis_,
                                FluxMode::corrected));
  r.vacuum_resets = apply_vacuum_floor(r.field, true);
  const int bad = first_nonpositive_average(r.field);
  if (bad < 0) return r;

  const double stage_cfl =
      gradflow::cfl_dt(fluxes, mesh_->h, basis_->omega1(), params_);
  if (dt > stage_cfl * (1.0 + 1e-12)) throw StageCflExceeded{stage_cfl};
  std::ostringstream msg;
  msg << "corrected step left cell " << bad << " with average "
      << r.field.cell_average(bad) << " at t=" << t << " (dt=" << dt
      << ", cfl=" << stage_cfl << ")";
  throw SolverAbort(msg.str(), u, t, 0);
}

StepOutcome Solver::hybrid_euler_attempt(const DGField& rho, const Eval& ev,
                                         double dt, double t) const {
  auto stage = hybrid_stage(rho, ev, dt, t);
  auto lim = limit(stage.field);
  StepOutcome out;
  out.new_field = std::move(lim.field);
  out.limiter_report = std::move(lim.report);
  out.dt_used = dt;
  out.used_correction = stage.used_correction;
  out.vacuum_resets = stage.vacuum_resets;
  return out;
}

StepOutcome Solver::rk3_attempt(const DGField& rho, const Eval& ev, double dt,
                                double t) const {
  StepOutcome out;
  out.dt_used = dt;
  out.limiter_report.worst_min_before = std::numeric_limits<double>::infinity();
  auto s1 = hybrid_stage(rho, ev, dt, t);
  auto l1 = limit(s1.field);
  merge_report(out.limiter_report, l1.report);

  // Stage combinations are written as base + w (stage - base) so that fixed
  // points of the stages are reproduced bit-for-bit.
  auto s2 = hybrid_stage(l1.field, evaluate(l1.field, false), dt, t + dt);
  auto l2 = limit(blend(rho, s2.field, 0.25));
  merge_report(out.limiter_report, l2.report);

  auto s3 = hybrid_stage(l2.field, evaluate(l2.field, false), dt, t + 0.5 * dt);
  auto l3 = limit(blend(rho, s3.field, 2.0 / 3.0));
  merge_report(out.limiter_report, l3.report);

  out.new_field = std::move(l3.field);
  out.used_correction =
      s1.used_correction || s2.used_correction || s3.used_correction;
  out.vacuum_resets =
      s1.vacuum_resets + s2.vacuum_resets + s3.vacuum_resets;
  return out;
}

StepOutcome Solver::advance(const DGField& rho, const Eval& ev, double dt,
                            double t, Integrator integrator, bool strict_energy,
                            Eval* next) const {
  auto attempt = [&](double h) {
    for (int restart = 0;; ++restart) {
      try {
        return integrator == Integrator::euler
                   ? hybrid_euler_attempt(rho, ev, h, t)
                   : rk3_attempt(rho, ev, h, t);
      } catch (const StageCflExceeded& e) {
        if (restart >= kCflRestarts) {
          throw SolverAbort("no admissible time step", rho, t, 0);
        }
        h = std::min(0.5 * h, e.stage_cfl);
      }
    }
  };
  Eval fresh;
  StepOutcome out = attempt(dt);
  fresh = evaluate(out.new_field);
  if (strict_energy) {
    for (int retry = 0; retry < params_.energy_retry_limit; ++retry) {
      const double slack = 1e-10 * (1.0 + std::abs(ev.energy));
      if (fresh.energy <= ev.energy + slack) break;
      out = attempt(out.dt_used * 0.5);
      fresh = evaluate(out.new_field);
    }
  }
  out.energy_before = ev.energy;
  out.energy_after = fresh.energy;
  out.mass_before = rho.total_mass();
  out.mass_after = out.new_field.total_mass();
  if (next != nullptr) *next = std::move(fresh);
  return out;
}

StepOutcome Solver::hybrid_euler_step(const DGField& rho, double dt,
                                      double t) const {
  return advance(rho, evaluate(rho), dt, t, Integrator::euler, false, nullptr);
}

StepOutcome Solver::ssp_rk3_step(const DGField& rho, double dt,
                                 double t) const {
  return advance(rho, evaluate(rho), dt, t, Integrator::rk3, false, nullptr);
}

StepOutcome Solver::step(const DGField& rho, double dt, double t) const {
  return advance(rho, evaluate(rho), dt, t, params_.integrator,
                 params_.strict_energy, nullptr);
}

DiagRecord Solver::diagnose(const DGField& rho, int step, double t, double dt,
                            std::optional<double> energy_value) const {
  DiagRecord r;
  r.step = step;
  r.t = t;
  r.dt = dt;
  r.energy = energy_value ? *energy_value : energy(rho);
  r.mass = rho.total_mass();
  r.min_cell_avg = min_average(rho);
  r.min_point = std::numeric_limits<double>::infinity();
  for (int i = 0; i < rho.n_cells(); ++i) {
    r.min_point = std::min(r.min_point, cell_min(rho, i));
  }
  return r;
}

RunResult Solver::run(const RunOptions& options) const {
  return run(initial_state(), 0.0, options);
}

RunResult Solver::run(const DGField& initial, double t0,
                      const RunOptions& options) const {
  if (!(options.t_final > t0)) {
    throw std::invalid_argument("Solver::run: t_final must exceed start time");
  }
  std::vector<double> snaps;
  for (double s : options.snapshot_times) {
    if (s >= t0 && s <= options.t_final) snaps.push_back(s);
  }
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
  size_t next_snap = 0;
  const double t_eps = 1e-12 * std::max(1.0, std::abs(options.t_final));

  RunResult result;
  DGField rho = initial;
  double t = t0;
  auto snapshot_at = [&](const Eval& ev) {
    while (next_snap < snaps.size() && snaps[next_snap] <= t + t_eps) {
      if (options.on_snapshot && std::abs(snaps[next_snap] - t) <= t_eps) {
        options.on_snapshot(t, rho, ev.q);
      }
      ++next_snap;
    }
  };

  auto record = [&](DiagRecord r) {
    if (options.on_step) options.on_step(r);
    result.records.push_back(std::move(r));
  };
  Eval ev = evaluate(rho);
  record(diagnose(rho, 0, t, 0.0, ev.energy));
  snapshot_at(ev);

  int step_index = 0;
  while (t < options.t_final - t_eps) {
    if (options.max_steps > 0 && step_index >= options.max_steps) {
      throw SolverAbort("Solver::run: step limit reached", rho, t, step_index);
    }
    double target = options.t_final;
    if (next_snap < snaps.size()) target = std::min(target, snaps[next_snap]);
    double dt = stable_dt(rho, ev, t);
    bool lands = false;
    if (t + dt >= target - t_eps) {
      dt = target - t;
      lands = true;
    }
    StepOutcome out;
    Eval next;
    try {
      out = advance(rho, ev, dt, t, params_.integrator, params_.strict_energy,
                    &next);
    } catch (SolverAbort& e) {
      e.step = step_index + 1;
      throw;
    }
    ++step_index;
    if (out.dt_used != dt) lands = false;
    t = lands ? target : t + out.dt_used;
    const double slack = 1e-10 * (1.0 + std::abs(out.energy_before));
    if (out.energy_after > out.energy_before + slack) ++result.energy_violations;
    if (out.used_correction) ++result.corrected_steps;
    result.vacuum_resets += out.vacuum_resets;
    result.flattened_cells +=
        static_cast<int>(out.limiter_report.cells_failed.size());
    rho = std::move(out.new_field);
    ev = std::move(next);

    DiagRecord r = diagnose(rho, step_index, t, out.dt_used, ev.energy);
    r.limited_cells = out.limiter_report.cells_modified;
    r.used_correction = out.used_correction;
    record(std::move(r));
    snapshot_at(ev);
  }
  result.final_field = std::move(rho);
  result.t = t;
  return result;
}

}  // namespace gradflow
