#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gradflow/limiter.hpp"
#include "oracles.hpp"

namespace gradflow {
namespace {

// Dense sampling of a reference polynomial given in scaled Legendre form.
double sampled_min(const std::vector<double>& c, int samples = 1000) {
  double best = 1e300;
  for (int s = 0; s <= samples; ++s) {
    const double x = -1.0 + 2.0 * s / samples;
    double v = 0.0;
    for (size_t j = 0; j < c.size(); ++j) {
      v += c[j] * std::sqrt(2.0 * j + 1) * oracle::legendre(static_cast<int>(j), x);
    }
    best = std::min(best, v);
  }
  return best;
}

TEST(ReferenceMin, HandValues) {
  EXPECT_EQ(reference_polynomial_min(std::vector<double>{2.5}), 2.5);
  // 1 + 0.5 sqrt(3) xi: increasing, minimum at the left endpoint.
  EXPECT_NEAR(reference_polynomial_min(std::vector<double>{1.0, 0.5}),
              1.0 - 0.5 * std::sqrt(3.0), 1e-15);
  // 1 - xi^2 = 2/3 - (2/3) P_2.
  const std::vector<double> bump = {2.0 / 3.0, 0.0, -2.0 / (3.0 * std::sqrt(5.0))};
  EXPECT_NEAR(reference_polynomial_min(bump), 0.0, 1e-15);
  EXPECT_NEAR(reference_polynomial_min(bump), sampled_min(bump), 1e-9);
  EXPECT_THROW(reference_polynomial_min(std::vector<double>{}), std::invalid_argument);
}

TEST(ReferenceMin, MatchesDenseSampling) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  for (int k = 1; k <= 4; ++k) {
    for (int n = 0; n < 200; ++n) {
      std::vector<double> c(k + 1);
      for (double& v : c) v = g(rng);
      const double exact = reference_polynomial_min(c);
      const double sampled = sampled_min(c, 20000);
      // Sampling can only overestimate the minimum.
      EXPECT_LE(exact, sampled + 1e-12);
      EXPECT_NEAR(exact, sampled, 1e-5 * (1.0 + std::abs(exact)));
    }
  }
}

TEST(Limiter, IdentityWhenAboveDelta) {
  const auto mesh = build_mesh(0.0, 1.0, 2);
  DGField f(mesh, 1);
  const double sh = std::sqrt(mesh->h);
  for (int i = 0; i < 2; ++i) {
    // Mean 2, minimum 0.5.
    f.coeff(i, 0) = 2.0 * sh;
    f.coeff(i, 1) = 1.5 / std::sqrt(3.0) * sh;
  }
  const auto r = apply_limiter(f, 1e-12);
  EXPECT_EQ(r.field.coeffs(), f.coeffs());
  EXPECT_EQ(r.report.cells_modified, 0);
  EXPECT_EQ(r.report.theta_min, 1.0);
  EXPECT_TRUE(r.report.cells_failed.empty());
}

TEST(Limiter, HalvesSlopeToReachZero) {
  const auto mesh = build_mesh(0.0, 1.0, 2);
  DGField f(mesh, 1);
  const double sh = std::sqrt(mesh->h);
  f.coeff(0, 0) = sh;
  f.coeff(0, 1) = 2.0 / std::sqrt(3.0) * sh;  // mean 1, min -1
  f.coeff(1, 0) = 3.0 * sh;
  const auto r = apply_limiter(f, 0.0);
  EXPECT_NEAR(r.report.theta_min, 0.5, 1e-14);
  EXPECT_EQ(r.report.cells_modified, 1);
  EXPECT_EQ(r.field.cell_average(0), 1.0 * sh / sh);
  // The limiter aims a few ulps of the mean above delta.
  EXPECT_NEAR(cell_min(r.field, 0), 0.0, 1e-13);
  EXPECT_GE(cell_min(r.field, 0), 0.0);
  EXPECT_NEAR(r.report.worst_min_before, -1.0, 1e-14);
}

TEST(Limiter, RefusesAveragesBelowDelta) {
  const auto mesh = build_mesh(0.0, 1.0, 3);
  DGField f(mesh, 1);
  for (int i = 0; i < 3; ++i) f.coeff(i, 0) = std::sqrt(mesh->h);
  f.coeff(1, 0) = 1e-14;
  try {
    apply_limiter(f, 1e-12);
    FAIL() << "expected LimiterFailure";
  } catch (const LimiterFailure& e) {
    ASSERT_EQ(e.report.cells_failed.size(), 1u);
    EXPECT_EQ(e.report.cells_failed[0], 1);
  }
  // The flatten policy sets the cell to its mean; nonpositive means still fail.
  f.coeff(1, 1) = 1e-15;
  const auto r = apply_limiter(f, 1e-12, SubDeltaPolicy::flatten);
  EXPECT_EQ(r.field.coeff(1, 1), 0.0);
  f.coeff(1, 0) = -1e-14;
  EXPECT_THROW(apply_limiter(f, 1e-12, SubDeltaPolicy::flatten), LimiterFailure);
}

TEST(Limiter, PropertiesOverRandomCells) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  int cells = 0;
  for (int batch = 0; batch < 100; ++batch) {
    const int k = 1 + batch % 4;
    const auto mesh = build_mesh(0.0, 1.0, 100);
    const double sh = std::sqrt(mesh->h);
    const double delta = std::pow(10.0, -14.0 + 12.0 * u(rng));
    DGField f(mesh, k);
    for (int i = 0; i < 100; ++i) {
      const double mean = delta + (2.0 - delta) * u(rng);
      const double spread = 4.0 * u(rng);
      f.coeff(i, 0) = mean * sh;
      for (int j = 1; j <= k; ++j) f.coeff(i, j) = spread * mean * g(rng) * sh / (j + 1);
    }
    const auto once = apply_limiter(f, delta).field;
    const auto twice = apply_limiter(once, delta).field;
    for (int i = 0; i < 100; ++i, ++cells) {
      const double m0 = f.cell_average(i), m1 = once.cell_average(i);
      EXPECT_LE(std::abs(m1 - m0), 1e-15 * std::abs(m0));
      EXPECT_GE(cell_min(once, i), delta - 1e-14);
      for (int j = 0; j <= k; ++j) EXPECT_EQ(twice.coeff(i, j), once.coeff(i, j));
      // Cells already admissible are untouched.
      if (cell_min(f, i) >= delta) {
        for (int j = 0; j <= k; ++j) EXPECT_EQ(once.coeff(i, j), f.coeff(i, j));
      }
    }
  }
  EXPECT_EQ(cells, 10000);
}

}  // namespace
}  // namespace gradflow
