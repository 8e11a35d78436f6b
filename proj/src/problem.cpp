#include "gradflow/problem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gradflow {

InternalEnergy InternalEnergy::zero() {
  InternalEnergy e;
  e.kind = Kind::zero;
  e.h = [](double) { return 0.0; };
  e.h_prime = [](double) { return 0.0; };
  e.h_double_prime = [](double) { return 0.0; };
  return e;
}

InternalEnergy InternalEnergy::entropy() {
  InternalEnergy e;
  e.kind = Kind::entropy;
  e.h = [](double r) { return r * (std::log(r) - 1.0); };
  e.h_prime = [](double r) { return std::log(r); };
  e.h_double_prime = [](double r) { return 1.0 / r; };
  return e;
}

InternalEnergy InternalEnergy::power(double nu, double m) {
  if (!(m > 1.0) || !(nu > 0.0)) {
    throw std::invalid_argument("InternalEnergy::power: need nu > 0, m > 1");
  }
  InternalEnergy e;
  e.kind = Kind::power;
  e.nu = nu;
  e.m = m;
  // Integer exponents avoid pow() on slightly negative traces.
  const bool integral = m == std::floor(m);
  const auto ipow = [](double r, int n) {
    double out = 1.0;
    for (int i = 0; i < n; ++i) out *= r;
    return out;
  };
  if (integral) {
    const int mi = static_cast<int>(m);
    e.h = [=](double r) { return nu / m * ipow(r, mi); };
    e.h_prime = [=](double r) { return nu * ipow(r, mi - 1); };
    e.h_double_prime = [=](double r) { return nu * (m - 1) * ipow(r, mi - 2); };
  } else {
    e.h = [=](double r) { return nu / m * std::pow(r, m); };
    e.h_prime = [=](double r) { return nu * std::pow(r, m - 1); };
    e.h_double_prime = [=](double r) {
      return nu * (m - 1) * std::pow(r, m - 2);
    };
  }
  return e;
}

ConfinementPotential ConfinementPotential::zero() {
  return {Kind::zero, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

ConfinementPotential ConfinementPotential::quadratic() {
  return {Kind::quadratic, [](double x) { return 0.5 * x * x; },
          [](double x) { return x; }};
}

ConfinementPotential ConfinementPotential::double_well() {
  return {Kind::double_well,
          [](double x) { return x * x * x * x + 0.4 * x * x * x - 5.0 * x * x; },
          [](double x) { return 4.0 * x * x * x + 1.2 * x * x - 10.0 * x; }};
}

InteractionKernel InteractionKernel::zero() {
  InteractionKernel k;
  k.kind = Kind::zero;
  k.w = [](double) { return 0.0; };
  k.smooth = k.w;
  k.support_radius = 0.0;
  return k;
}

InteractionKernel InteractionKernel::attractive_repulsive() {
  InteractionKernel k;
  k.kind = Kind::attractive_repulsive;
  k.w = [](double x) { return 0.5 * x * x - std::log(std::abs(x)); };
  k.smooth = [](double x) { return 0.5 * x * x; };
  k.log_coefficient = -1.0;
  return k;
}

InteractionKernel InteractionKernel::compact_tent() {
  InteractionKernel k;
  k.kind = Kind::compact;
  k.w = [](double x) { return -std::max(1.0 - std::abs(x), 0.0); };
  k.smooth = k.w;
  k.kinks = {-1.0, 0.0, 1.0};
  k.support_radius = 1.0;
  return k;
}

InteractionKernel InteractionKernel::gaussian() {
  InteractionKernel k;
  k.kind = Kind::gaussian;
  k.w = [](double x) { return -std::exp(-0.25 * x * x); };
  k.smooth = k.w;
  return k;
}

std::string_view to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::zero_flux: return "zero-flux";
    case BoundaryKind::dirichlet: return "dirichlet";
    case BoundaryKind::periodic: return "periodic";
  }
  return "unknown";
}

void validate_problem(const ProblemSpec& p) {
  if (!(p.b > p.a)) throw std::invalid_argument("problem: empty domain");
  if (!p.initial_datum) throw std::invalid_argument("problem: no initial datum");
  if (p.bc == BoundaryKind::periodic && !p.kernel.is_zero()) {
    throw std::invalid_argument(
        "problem: periodic boundaries with a nonzero interaction kernel are "
        "not supported");
  }
  if (p.bc == BoundaryKind::dirichlet && !p.dirichlet_data) {
    throw std::invalid_argument("problem: dirichlet boundary without data");
  }
  constexpr int kSamples = 1000;
  for (int s = 0; s < kSamples; ++s) {
    const double x = p.a + (p.b - p.a) * (s + 0.5) / kSamples;
    const double r0 = p.initial_datum(x);
    if (!(r0 >= 0.0)) {
      throw std::invalid_argument("problem: initial datum negative at x = " +
                                  std::to_string(x));
    }
    if (p.exact_solution &&
        std::abs((*p.exact_solution)(0.0, x) - r0) > 1e-12) {
      throw std::invalid_argument(
          "problem: exact solution disagrees with initial datum at t = 0");
    }
  }
}

ProblemSpec make_problem(InternalEnergy h, ConfinementPotential v,
                         InteractionKernel w, double a, double b,
                         BoundaryKind bc, ScalarFn initial_datum) {
  ProblemSpec p;
  p.name = "custom";
  p.description = "user-defined problem";
  p.internal_energy = std::move(h);
  p.confinement = std::move(v);
  p.kernel = std::move(w);
  p.a = a;
  p.b = b;
  p.bc = bc;
  p.initial_datum = std::move(initial_datum);
  validate_problem(p);
  return p;
}

namespace {

constexpr double kPi = std::numbers::pi;

double indicator(double x, double lo, double hi) {
  return (x >= lo && x <= hi) ? 1.0 : 0.0;
}

double gaussian_density(double x, double center) {
  const double d = x - center;
  return std::exp(-0.5 * d * d) / std::sqrt(2.0 * kPi);
}

ProblemSpec heat() {
  ProblemSpec p;
  p.name = "heat";
  p.description = "heat equation, H = rho(ln rho - 1), periodic on [-pi, pi]";
  p.internal_energy = InternalEnergy::entropy();
  p.a = -kPi;
  p.b = kPi;
  p.bc = BoundaryKind::periodic;
  p.initial_datum = [](double x) { return 2.0 + std::sin(x); };
  p.exact_solution = [](double t, double x) {
    return 2.0 + std::exp(-t) * std::sin(x);
  };
  p.steady_state = [](double) { return 2.0; };
  p.default_t_final = 0.1;
  p.default_n_cells = 64;
  p.default_degree = 2;
  return p;
}

ProblemSpec porous_medium() {
  ProblemSpec p;
  p.name = "porous-medium";
  p.description =
      "porous medium, H = rho^2, V = x^2/2, periodic on [-2, 2]";
  p.internal_energy = InternalEnergy::power(2.0, 2.0);
  p.confinement = ConfinementPotential::quadratic();
  p.a = -2.0;
  p.b = 2.0;
  p.bc = BoundaryKind::periodic;
  p.initial_datum = [](double x) { return std::max(1.0 - std::abs(x), 0.0); };
  const double c = std::pow(3.0 / 8.0, 2.0 / 3.0);
  p.steady_state = [c](double x) { return std::max(c - 0.25 * x * x, 0.0); };
  p.default_t_final = 32.0;
  p.default_n_cells = 64;
  p.default_degree = 3;
  return p;
}

ProblemSpec attractive_repulsive() {
  ProblemSpec p;
  p.name = "attractive-repulsive";
  p.description =
      "H = 0, V = 0, W = |x|^2/2 - ln|x|, zero flux on [-4, 4]";
  p.kernel = InteractionKernel::attractive_repulsive();
  p.a = -4.0;
  p.b = 4.0;
  p.bc = BoundaryKind::zero_flux;
  p.initial_datum = [](double x) { return gaussian_density(x, 0.0); };
  const double r = std::sqrt(2.0);
  p.steady_state = [r](double x) {
    return std::abs(x) < r ? std::sqrt(std::max(2.0 - x * x, 0.0)) / kPi : 0.0;
  };
  p.default_t_final = 10.0;
  p.default_n_cells = 128;
  p.default_degree = 3;
  return p;
}

ProblemSpec compact_attraction(const std::string& variant) {
  double half_width = 2.0;
  if (variant.empty() || variant == "a2" || variant == "2" || variant == "a=2") {
    half_width = 2.0;
  } else if (variant == "a3" || variant == "3" || variant == "a=3") {
    half_width = 3.0;
  } else {
    throw std::invalid_argument("example 4: unknown variant '" + variant +
                                "' (expected a2 or a3)");
  }
  ProblemSpec p;
  p.name = "compact-attraction";
  p.variant = half_width == 2.0 ? "a2" : "a3";
  p.description =
      "H = (nu/m) rho^m, W = -(1-|x|)_+, zero flux on [-6, 6], block datum";
  p.internal_energy = InternalEnergy::power(0.25, 3.0);
  p.kernel = InteractionKernel::compact_tent();
  p.a = -6.0;
  p.b = 6.0;
  p.bc = BoundaryKind::zero_flux;
  p.initial_datum = [half_width](double x) {
    return indicator(x, -half_width, half_width) / (2.0 * half_width);
  };
  p.default_t_final = 30.0;
  p.default_n_cells = 128;
  p.default_degree = 2;
  return p;
}

ProblemSpec gaussian_attraction() {
  ProblemSpec p;
  p.name = "gaussian-attraction";
  p.description =
      "H = (nu/m) rho^m, W = -exp(-|x|^2/4), zero flux on [-8, 8], three blocks";
  p.internal_energy = InternalEnergy::power(0.25, 3.0);
  p.kernel = InteractionKernel::gaussian();
  p.a = -8.0;
  p.b = 8.0;
  p.bc = BoundaryKind::zero_flux;
  p.initial_datum = [](double x) {
    return 0.2 * (indicator(x, -5.0, -4.0) + indicator(x, -2.0, 1.0) +
                  indicator(x, 3.0, 4.0));
  };
  p.default_t_final = 600.0;
  p.default_n_cells = 128;
  p.default_degree = 2;
  return p;
}

ProblemSpec double_well(const std::string& variant) {
  double center = 0.0;
  if (variant.empty() || variant == "centered") {
    center = 0.0;
  } else if (variant == "shifted") {
    center = 1.5;
  } else {
    throw std::invalid_argument("example 6: unknown variant '" + variant +
                                "' (expected centered or shifted)");
  }
  ProblemSpec p;
  p.name = "double-well";
  p.variant = center == 0.0 ? "centered" : "shifted";
  p.description =
      "H = rho^2, V = x^4 + 0.4x^3 - 5x^2, zero flux on [-4, 4], Gaussian";
  p.internal_energy = InternalEnergy::power(2.0, 2.0);
  p.confinement = ConfinementPotential::double_well();
  p.a = -4.0;
  p.b = 4.0;
  p.bc = BoundaryKind::zero_flux;
  p.initial_datum = [center](double x) { return gaussian_density(x, center); };
  p.default_t_final = 10.0;
  p.default_n_cells = 256;
  p.default_degree = 2;
  return p;
}

}  // namespace

ProblemSpec example(int id, const ExampleOptions& options) {
  ProblemSpec p;
  switch (id) {
    case 1: p = heat(); break;
    case 2: p = porous_medium(); break;
    case 3: p = attractive_repulsive(); break;
    case 4: p = compact_attraction(options.variant); break;
    case 5: p = gaussian_attraction(); break;
    case 6: p = double_well(options.variant); break;
    default:
      throw std::invalid_argument("unknown example id " + std::to_string(id) +
                                  " (expected 1..6)");
  }
  if ((id <= 3 || id == 5) && !options.variant.empty() &&
      options.variant != "default") {
    throw std::invalid_argument("example " + std::to_string(id) +
                                " has no variant '" + options.variant + "'");
  }
  p.id = id;
  if (options.nu || options.m) {
    if (p.internal_energy.kind != InternalEnergy::Kind::power) {
      throw std::invalid_argument("example " + std::to_string(id) +
                                  ": nu/m overrides need a power-law energy");
    }
    p.internal_energy =
        InternalEnergy::power(options.nu.value_or(p.internal_energy.nu),
                              options.m.value_or(p.internal_energy.m));
  }
  if (options.a) p.a = *options.a;
  if (options.b) p.b = *options.b;
  validate_problem(p);
  return p;
}

std::vector<std::string> example_summaries() {
  std::vector<std::string> out;
  for (int id = 1; id <= 6; ++id) {
    const auto p = example(id);
    out.push_back(std::to_string(id) + "  " + p.name + ": " + p.description);
  }
  return out;
}

SchemeParams default_params() { return SchemeParams{}; }

double beta0_lower_bound(int degree, double beta1) {
  if (degree < 1) {
    throw std::invalid_argument("beta0_lower_bound: degree must be >= 1");
  }
  const double k2 = static_cast<double>(degree) * degree;
  const double s = k2 - 1.0;
  return 2.0 * k2 * (1.0 - beta1 * s + beta1 * beta1 / 3.0 * s * s);
}

}  // namespace gradflow
