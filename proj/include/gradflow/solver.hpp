#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradflow/basis.hpp"
#include "gradflow/convolution.hpp"
#include "gradflow/dg_field.hpp"
#include "gradflow/dg_operator.hpp"
#include "gradflow/limiter.hpp"
#include "gradflow/problem.hpp"

namespace gradflow {

struct StepOutcome {
  DGField new_field;
  double dt_used = 0.0;
  bool used_correction = false;
  LimiterReport limiter_report;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double mass_before = 0.0;
  double mass_after = 0.0;
  /// Stage outputs whose average fell below the vacuum density (1e-200)
  /// and were reset to it.
  int vacuum_resets = 0;
};

/// One row of the per-step time series.
struct DiagRecord {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  double energy = 0.0;
  double mass = 0.0;
  double min_cell_avg = 0.0;
  double min_point = 0.0;
  int limited_cells = 0;
  bool used_correction = false;
};

/// Thrown when a corrected step within the positivity CFL still produces a
/// nonpositive cell average. Holds the state the failing step started from.
class SolverAbort : public std::runtime_error {
 public:
  SolverAbort(const std::string& what, DGField state, double t, int step)
      : std::runtime_error(what), state(std::move(state)), t(t), step(step) {}
  DGField state;
  double t;
  int step;
};

/// safety * omega1 * h / max_flux, capped by cap_coef * h^2. Fluxes below
/// 1e-14 in magnitude count as zero and select the cap.
double cfl_dt(double max_abs_flux, double h, double omega1,
              const SchemeParams& params);
/// Same, taking the largest |ddg_flux| over the given interfaces.
double cfl_dt(const std::vector<InterfaceFluxData>& fluxes, double h,
              double omega1, const SchemeParams& params);

/// h^2 times the spectral radius of the DDG discretization of d^2/dx^2 on a
/// periodic mesh. Depends only on degree, beta0, beta1 and the Gauss rule.
double ddg_laplacian_spectral_radius(const SchemeParams& params);

struct RunOptions {
  double t_final = 0.0;
  /// Times at which snapshots are taken; the step size is clipped to land on
  /// them exactly. t = 0 is allowed.
  std::vector<double> snapshot_times;
  std::function<void(const DiagRecord&)> on_step;
  std::function<void(double t, const DGField& rho, const DGField& q)>
      on_snapshot;
  /// Abort after this many steps (0: unlimited).
  long max_steps = 0;
};

struct RunResult {
  DGField final_field;
  double t = 0.0;
  std::vector<DiagRecord> records;
  int energy_violations = 0;
  int corrected_steps = 0;
  int flattened_cells = 0;  // cells limited to their mean, summed over steps
  long vacuum_resets = 0;
};

/// Owns the discretization of one problem: mesh, basis, kernel moments.
/// All stepping methods are const and reentrant.
class Solver {
 public:
  Solver(ProblemSpec problem, SchemeParams params, int n_cells);

  const ProblemSpec& problem() const { return problem_; }
  const SchemeParams& params() const { return params_; }
  const MeshPtr& mesh() const { return mesh_; }
  const Basis& basis() const { return *basis_; }
  const KernelMomentTable& moments() const { return moments_; }

  /// Projection of the initial datum, lifted by delta where averages fall
  /// below delta, then limited.
  DGField initial_state() const;
  DGField project(const std::function<double(double)>& f) const;

  ConvolutionValues convolution(const DGField& rho) const;
  DGField energy_flux(const DGField& rho,
                      const ConvolutionValues* conv = nullptr) const;
  double energy(const DGField& rho,
                const ConvolutionValues* conv = nullptr) const;
  DGField rhs(const DGField& rho, FluxMode mode, double t = 0.0) const;

  /// Positivity CFL for the state rho (q computed internally).
  double cfl_dt(const DGField& rho, double t = 0.0) const;
  /// Step size the driver uses: min of the positivity CFL, the linear
  /// diffusive stability bound and cap_coef * h^2 (or fixed_dt if set).
  double stable_dt(const DGField& rho, double t = 0.0) const;

  /// Single Forward Euler step in the given mode, no limiter.
  StepOutcome euler_step(const DGField& rho, double dt, FluxMode mode,
                         double t = 0.0) const;
  /// Plain step, then a corrected retry if some average is <= 0, then the
  /// limiter. Throws SolverAbort if the corrected step fails within the CFL.
  StepOutcome hybrid_euler_step(const DGField& rho, double dt,
                                double t = 0.0) const;
  /// SSP-RK3 with the hybrid check and limiter after every stage.
  StepOutcome ssp_rk3_step(const DGField& rho, double dt, double t = 0.0) const;
  /// One step of the configured integrator, with the strict-energy retry.
  StepOutcome step(const DGField& rho, double dt, double t = 0.0) const;

  RunResult run(const RunOptions& options) const;
  RunResult run(const DGField& initial, double t0,
                const RunOptions& options) const;

  /// Diagnostics of a state; the energy is computed unless supplied.
  DiagRecord diagnose(const DGField& rho, int step, double t, double dt,
                      std::optional<double> energy = std::nullopt) const;

 private:
  // Quantities derived from one state, shared between the step size
  // selection, the first stage and the energy bookkeeping.
  struct Eval {
    ConvolutionValues conv;
    DGField q;
    double energy = 0.0;
  };
  struct Stage {
    DGField field;  // Euler output before limiting
    bool used_correction = false;
    int vacuum_resets = 0;
  };

  Eval evaluate(const DGField& rho, bool with_energy = true) const;
  // Limits rho; cells with 0 < average < delta are flattened to their mean.
  LimiterResult limit(const DGField& rho) const;
  double stable_dt(const DGField& rho, const Eval& ev, double t) const;
  Stage hybrid_stage(const DGField& u, const Eval& ev, double dt,
                     double t) const;
  StepOutcome hybrid_euler_attempt(const DGField& rho, const Eval& ev,
                                   double dt, double t) const;
  StepOutcome rk3_attempt(const DGField& rho, const Eval& ev, double dt,
                          double t) const;
  // One step of the configured integrator with CFL restarts and the
  // strict-energy retry. Fills `next` with the evaluation of the new state.
  StepOutcome advance(const DGField& rho, const Eval& ev, double dt, double t,
                      Integrator integrator, bool strict_energy,
                      Eval* next) const;
  double diffusion_max(const DGField& rho) const;

  ProblemSpec problem_;
  SchemeParams params_;
  MeshPtr mesh_;
  std::shared_ptr<const Basis> basis_;
  KernelMomentTable moments_;
  double laplacian_radius_ = 0.0;
};

}  // namespace gradflow
