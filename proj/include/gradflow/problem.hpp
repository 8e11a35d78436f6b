#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gradflow {

using ScalarFn = std::function<double(double)>;
using SpaceTimeFn = std::function<double(double, double)>;  // (t, x)

/// Internal energy density H with its first two derivatives.
struct InternalEnergy {
  enum class Kind { zero, entropy, power, custom };

  Kind kind = Kind::zero;
  double nu = 0.0;  // power kind: H = (nu / m) rho^m
  double m = 1.0;
  ScalarFn h;
  ScalarFn h_prime;
  ScalarFn h_double_prime;

  /// True when H' is undefined at rho <= 0 (entropy).
  bool singular_at_zero() const { return kind == Kind::entropy; }
  bool is_zero() const { return kind == Kind::zero; }

  static InternalEnergy zero();
  /// H = rho (ln rho - 1)
  static InternalEnergy entropy();
  /// H = (nu / m) rho^m, m > 1
  static InternalEnergy power(double nu, double m);
};

/// External confinement potential V and V'.
struct ConfinementPotential {
  enum class Kind { zero, quadratic, double_well, custom };

  Kind kind = Kind::zero;
  ScalarFn v;
  ScalarFn v_prime;

  bool is_zero() const { return kind == Kind::zero; }

  static ConfinementPotential zero();
  /// V = x^2 / 2
  static ConfinementPotential quadratic();
  /// V = x^4 + 0.4 x^3 - 5 x^2
  static ConfinementPotential double_well();
};

/// Symmetric interaction kernel W split as W = smooth + log_coefficient *
/// ln|x|. Kinks lists points where the smooth part is not analytic, used to
/// split integration intervals.
struct InteractionKernel {
  enum class Kind { zero, attractive_repulsive, compact, gaussian, custom };

  Kind kind = Kind::zero;
  ScalarFn w;              // full kernel (may be infinite at 0)
  ScalarFn smooth;         // W minus the logarithmic part
  double log_coefficient = 0.0;
  std::vector<double> kinks;
  double support_radius = std::numeric_limits<double>::infinity();

  bool is_zero() const { return kind == Kind::zero; }
  bool has_log_singularity() const { return log_coefficient != 0.0; }

  static InteractionKernel zero();
  /// W = |x|^2 / 2 - ln|x|
  static InteractionKernel attractive_repulsive();
  /// W = -(1 - |x|)_+
  static InteractionKernel compact_tent();
  /// W = -exp(-|x|^2 / 4)
  static InteractionKernel gaussian();
};

enum class BoundaryKind { zero_flux, dirichlet, periodic };

std::string_view to_string(BoundaryKind kind);

struct ProblemSpec {
  int id = 0;  // catalog id, 0 for user-defined problems
  std::string name;
  std::string variant;
  std::string description;

  InternalEnergy internal_energy = InternalEnergy::zero();
  ConfinementPotential confinement = ConfinementPotential::zero();
  InteractionKernel kernel = InteractionKernel::zero();

  double a = 0.0;
  double b = 1.0;
  BoundaryKind bc = BoundaryKind::zero_flux;
  SpaceTimeFn dirichlet_data;  // g(t, x), used when bc == dirichlet

  ScalarFn initial_datum;
  std::optional<SpaceTimeFn> exact_solution;
  std::optional<ScalarFn> steady_state;

  // Defaults used when the caller does not override them.
  double default_t_final = 1.0;
  int default_n_cells = 64;
  int default_degree = 2;
};

/// Overrides accepted by example(); unset fields keep catalog values.
struct ExampleOptions {
  std::string variant;
  std::optional<double> nu;
  std::optional<double> m;
  std::optional<double> a;
  std::optional<double> b;
};

/// The six benchmark problems. Throws std::invalid_argument for an unknown
/// id or variant, or for a nonzero kernel combined with periodic boundaries.
ProblemSpec example(int id, const ExampleOptions& options = {});

/// One-line catalog summaries, index 0 holds example 1.
std::vector<std::string> example_summaries();

/// Builds a user-defined problem and validates it like catalog entries.
ProblemSpec make_problem(InternalEnergy h, ConfinementPotential v,
                         InteractionKernel w, double a, double b,
                         BoundaryKind bc, ScalarFn initial_datum);

/// Throws std::invalid_argument when the problem is inconsistent (negative
/// initial datum at sample points, periodic with a kernel, ...).
void validate_problem(const ProblemSpec& problem);

enum class Integrator { euler, rk3 };

struct SchemeParams {
  double beta0 = 5.434;
  double beta1 = 0.15;
  double delta = 1e-12;
  int degree = 2;
  int gauss_points = 0;    // 0: degree + 3
  int lobatto_points = 0;  // 0: minimal count certifying cell averages
  double safety = 0.9;     // factor on the positivity CFL
  double cap_coef = 1.0;   // dt <= cap_coef * h^2
  double diffusive_safety = 0.8;  // factor on the linear stability bound
  double fixed_dt = 0.0;          // > 0 bypasses the adaptive step policy
  Integrator integrator = Integrator::rk3;
  bool strict_energy = false;
  int energy_retry_limit = 20;
};

SchemeParams default_params();

/// 2k^2 (1 - beta1 (k^2 - 1) + beta1^2 / 3 (k^2 - 1)^2); throws for k < 1.
double beta0_lower_bound(int degree, double beta1);

}  // namespace gradflow
