#include "gradflow/limiter.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace gradflow {

namespace {

constexpr int kBuf = kMaxDegree + 1;
using Poly = std::array<double, kBuf>;  // monomial coefficients, low first

struct MonomialTables {
  // rows[k][j][n]: coefficient of xi^n in sqrt(2j+1) P_j
  std::array<std::vector<std::vector<double>>, kBuf> rows;
  MonomialTables() {
    for (int k = 0; k <= kMaxDegree; ++k) rows[k] = scaled_legendre_monomials(k);
  }
};

const MonomialTables& tables() {
  static const MonomialTables t;
  return t;
}

double horner(const double* a, int deg, double x) {
  double v = 0.0;
  for (int n = deg; n >= 0; --n) v = v * x + a[n];
  return v;
}

// Real roots in (-1, 1) of a[0] + a[1] x + ... + a[deg] x^deg. Returns the
// root count written to `out`.
int interior_roots(const double* a_in, int deg, double* out) {
  Poly a{};
  std::copy(a_in, a_in + deg + 1, a.begin());
  while (deg > 0 && a[deg] == 0.0) --deg;
  if (deg < 1) return 0;
  std::array<double, kBuf> roots{};
  int count = 0;
  if (deg == 1) {
    roots[count++] = -a[0] / a[1];
  } else if (deg == 2) {
    const double disc = a[1] * a[1] - 4.0 * a[2] * a[0];
    if (disc >= 0.0) {
      // Cancellation-free quadratic formula.
      const double s = -0.5 * (a[1] + std::copysign(std::sqrt(disc), a[1]));
      if (s != 0.0) {
        roots[count++] = s / a[2];
        roots[count++] = a[0] / s;
      } else {
        roots[count++] = 0.0;
      }
    }
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (int r = 1; r < deg; ++r) companion(r, r - 1) = 1.0;
    for (int r = 0; r < deg; ++r) companion(r, deg - 1) = -a[r] / a[deg];
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    for (const auto& z : solver.eigenvalues()) {
      if (std::abs(z.imag()) <= 1e-7 * (1.0 + std::abs(z.real()))) {
        roots[count++] = z.real();
      }
    }
  }
  // Newton polish to a residual of 1e-12 relative to the coefficients.
  Poly da{};
  double scale = 0.0;
  for (int n = 0; n <= deg; ++n) scale = std::max(scale, std::abs(a[n]));
  for (int n = 1; n <= deg; ++n) da[n - 1] = n * a[n];
  int kept = 0;
  for (int r = 0; r < count; ++r) {
    double x = roots[r];
    for (int it = 0; it < 8; ++it) {
      const double f = horner(a.data(), deg, x);
      const double df = horner(da.data(), deg - 1, x);
      if (df == 0.0 || std::abs(f) <= 1e-15 * scale) break;
      const double step = f / df;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    if (x > -1.0 && x < 1.0) out[kept++] = x;
  }
  return kept;
}

// Minimum over [-1, 1] when it is below `threshold`; otherwise any value in
// [threshold, true minimum] may be returned. Infinite threshold: exact.
double min_below(std::span<const double> coeffs, double threshold) {
  const int k = static_cast<int>(coeffs.size()) - 1;
  // |sqrt(2j+1) P_j| <= sqrt(2j+1) on [-1, 1].
  double bound = coeffs[0];
  for (int j = 1; j <= k; ++j) {
    bound -= std::abs(coeffs[j]) * std::sqrt(2.0 * j + 1.0);
  }
  if (bound >= threshold) return bound;
  const auto& mono = tables().rows[k];
  Poly a{};
  for (int j = 0; j <= k; ++j)
    for (int n = 0; n <= j; ++n) a[n] += coeffs[j] * mono[j][n];
  double best = std::min(horner(a.data(), k, -1.0), horner(a.data(), k, 1.0));
  if (k < 2) return best;
  Poly da{};
  for (int n = 1; n <= k; ++n) da[n - 1] = n * a[n];
  std::array<double, kBuf> roots{};
  const int count = interior_roots(da.data(), k - 1, roots.data());
  for (int r = 0; r < count; ++r) {
    best = std::min(best, horner(a.data(), k, roots[r]));
  }
  return best;
}

}  // namespace

double reference_polynomial_min(std::span<const double> coeffs) {
  if (coeffs.empty() || static_cast<int>(coeffs.size()) > kBuf) {
    throw std::invalid_argument(
        "reference_polynomial_min: degree must lie in [0, " +
        std::to_string(kMaxDegree) + "]");
  }
  return min_below(coeffs, std::numeric_limits<double>::infinity());
}

double cell_min(const DGField& field, int cell) {
  if (cell < 0 || cell >= field.n_cells()) {
    throw std::out_of_range("cell_min: cell " + std::to_string(cell) +
                            " out of range");
  }
  return reference_polynomial_min(field.cell(cell)) /
         std::sqrt(field.mesh().h);
}

LimiterResult apply_limiter(const DGField& field, double delta,
                            SubDeltaPolicy policy) {
  if (field.modes() > kBuf) {
    throw std::invalid_argument("apply_limiter: degree above kMaxDegree");
  }
  LimiterResult result{field, {}};
  auto& rep = result.report;
  rep.worst_min_before = std::numeric_limits<double>::infinity();
  const double sqrt_h = std::sqrt(field.mesh().h);
  const double inv_sqrt_h = 1.0 / sqrt_h;
  std::vector<int> nonpositive;
  std::vector<double> mins(field.n_cells());
  for (int i = 0; i < field.n_cells(); ++i) {
    const auto c = field.cell(i);
    const double mean = c[0] * inv_sqrt_h;
    // Exact whenever the minimum is below delta (the only case acted upon).
    mins[i] = min_below(c, delta * sqrt_h) * inv_sqrt_h;
    rep.worst_min_before = std::min(rep.worst_min_before, mins[i]);
    if (mean < delta) {
      rep.cells_failed.push_back(i);
      if (!(mean > 0.0)) nonpositive.push_back(i);
    }
  }
  if (!rep.cells_failed.empty() &&
      (policy == SubDeltaPolicy::strict || !nonpositive.empty())) {
    const int bad = nonpositive.empty() ? rep.cells_failed.front()
                                        : nonpositive.front();
    throw LimiterFailure("apply_limiter: cell " + std::to_string(bad) +
                             " has average " +
                             std::to_string(field.cell_average(bad)) +
                             " below delta",
                         rep);
  }

  for (int i = 0; i < field.n_cells(); ++i) {
    const auto c = result.field.cell(i);
    const double mean = c[0] * inv_sqrt_h;
    const double target = std::min(delta, mean);
    const double lo = mins[i];
    // Cells already at the target up to roundoff are left alone, which keeps
    // the limiter idempotent.
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() *
                         std::max(std::abs(mean), 1e-300);
    if (lo >= target - slack) continue;
    double theta = 0.0;
    if (mean > delta) {
      // Aim above delta by the rounding error of evaluating the scaled
      // polynomial, so a second pass sees a minimum >= delta.
      double spread = 0.0;
      for (size_t j = 1; j < c.size(); ++j) {
        spread += std::abs(c[j]) * std::sqrt(2.0 * j + 1.0);
      }
      spread *= inv_sqrt_h;
      const double theta0 = (mean - delta) / (mean - lo);
      const double aim =
          delta + 32.0 * std::numeric_limits<double>::epsilon() *
                      (std::abs(mean) + theta0 * spread);
      theta = aim < mean ? (mean - aim) / (mean - lo) : 0.0;
    }
    for (size_t j = 1; j < c.size(); ++j) c[j] *= theta;
    ++rep.cells_modified;
    rep.theta_min = std::min(rep.theta_min, theta);
  }
  return result;
}

}  // namespace gradflow
