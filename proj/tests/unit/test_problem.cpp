#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gradflow/problem.hpp"
#include "oracles.hpp"

namespace gradflow {
namespace {

TEST(InternalEnergy, DerivativeConsistencyAndConvexity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1e-12, 10.0);
  for (const auto& h : {InternalEnergy::entropy(), InternalEnergy::power(0.25, 3.0),
                        InternalEnergy::power(2.0, 2.0)}) {
    for (int n = 0; n < 20; ++n) {
      const double r = u(rng) + 2e-5;
      const double e = 1e-5;
      EXPECT_NEAR(h.h_prime(r), (h.h(r + e) - h.h(r - e)) / (2 * e), 1e-6);
      EXPECT_NEAR(h.h_double_prime(r), (h.h_prime(r + e) - h.h_prime(r - e)) / (2 * e),
                  1e-4 * (1 + std::abs(h.h_double_prime(r))));
      EXPECT_GE(h.h_double_prime(r), 0.0);
    }
  }
  EXPECT_TRUE(InternalEnergy::entropy().singular_at_zero());
  EXPECT_THROW(InternalEnergy::power(1.0, 1.0), std::invalid_argument);
}

TEST(Confinement, DerivativeConsistency) {
  for (const auto& v : {ConfinementPotential::quadratic(),
                        ConfinementPotential::double_well()}) {
    for (double x : {-3.1, -0.4, 0.0, 1.7, 2.9}) {
      const double e = 1e-5;
      EXPECT_NEAR(v.v_prime(x), (v.v(x + e) - v.v(x - e)) / (2 * e), 1e-6);
    }
  }
  const auto dw = ConfinementPotential::double_well();
  EXPECT_DOUBLE_EQ(dw.v(1.0), 1.0 + 0.4 - 5.0);
}

TEST(Kernel, Symmetry) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(1e-3, 6.0);
  for (const auto& w : {InteractionKernel::attractive_repulsive(),
                        InteractionKernel::compact_tent(), InteractionKernel::gaussian()}) {
    for (int n = 0; n < 20; ++n) {
      const double x = u(rng);
      EXPECT_EQ(w.w(x), w.w(-x));
    }
  }
  const auto ar = InteractionKernel::attractive_repulsive();
  EXPECT_TRUE(ar.has_log_singularity());
  EXPECT_NEAR(ar.w(2.0), 2.0 - std::log(2.0), 1e-15);
  EXPECT_EQ(InteractionKernel::compact_tent().w(1.5), 0.0);
  EXPECT_NEAR(InteractionKernel::gaussian().w(2.0), -std::exp(-1.0), 1e-15);
}

TEST(Catalog, Example1ExactSolution) {
  const auto p = example(1);
  EXPECT_EQ((*p.exact_solution)(0.1, 0.0), 2.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-M_PI, M_PI), ut(0.0, 1.0);
  for (int n = 0; n < 100; ++n) {
    const double x = ux(rng), t = ut(rng);
    // rho_t - rho_xx with analytic derivatives of 2 + e^{-t} sin x.
    const double rho_t = -std::exp(-t) * std::sin(x);
    const double rho_xx = -std::exp(-t) * std::sin(x);
    EXPECT_NEAR(rho_t - rho_xx, 0.0, 1e-10);
    EXPECT_NEAR((*p.exact_solution)(t, x), 2.0 + std::exp(-t) * std::sin(x), 1e-15);
  }
  for (int n = 0; n < 50; ++n) {
    const double x = ux(rng);
    EXPECT_NEAR((*p.exact_solution)(0.0, x), p.initial_datum(x), 1e-12);
  }
  EXPECT_EQ(p.bc, BoundaryKind::periodic);
}

TEST(Catalog, SteadyStates) {
  EXPECT_NEAR((*example(2).steady_state)(0.0), std::pow(3.0 / 8.0, 2.0 / 3.0), 1e-15);
  EXPECT_NEAR((*example(2).steady_state)(0.0), 0.520021, 1e-6);
  EXPECT_NEAR((*example(3).steady_state)(0.0), std::sqrt(2.0) / M_PI, 1e-15);
  EXPECT_NEAR((*example(3).steady_state)(0.0), 0.450158, 1e-6);
  const auto& s3 = *example(3).steady_state;
  const double mass = oracle::adaptive(s3, -std::sqrt(2.0), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(mass, 1.0, 1e-8);
  // Example 2 equilibrium carries the unit mass of its initial datum.
  const auto& s2 = *example(2).steady_state;
  const double r = 2.0 * std::sqrt(std::pow(3.0 / 8.0, 2.0 / 3.0));
  EXPECT_NEAR(oracle::adaptive(s2, -r, r, 1e-12), 1.0, 1e-8);
}

TEST(Catalog, InitialDataNonnegative) {
  for (int id = 1; id <= 6; ++id) {
    const auto p = example(id);
    for (int n = 0; n <= 1000; ++n) {
      const double x = p.a + (p.b - p.a) * n / 1000.0;
      EXPECT_GE(p.initial_datum(x), 0.0) << "example " << id;
    }
  }
}

TEST(Catalog, Ingredients) {
  const auto p4 = example(4, {.variant = "a3"});
  EXPECT_EQ(p4.variant, "a3");
  EXPECT_DOUBLE_EQ(p4.initial_datum(2.5), 1.0 / 6.0);
  EXPECT_EQ(p4.internal_energy.nu, 0.25);
  EXPECT_EQ(p4.internal_energy.m, 3.0);
  const auto p5 = example(5, {.nu = 0.5});
  EXPECT_EQ(p5.internal_energy.nu, 0.5);
  EXPECT_EQ(p5.internal_energy.m, 3.0);
  EXPECT_DOUBLE_EQ(example(5).initial_datum(0.0), 0.2);
  EXPECT_EQ(example(6).a, -4.0);
  EXPECT_EQ(example(6).confinement.kind, ConfinementPotential::Kind::double_well);
  EXPECT_EQ(example(3).bc, BoundaryKind::zero_flux);
  EXPECT_NEAR(example(6, {.variant = "shifted"}).initial_datum(1.5),
              1.0 / std::sqrt(2 * M_PI), 1e-15);
}

TEST(Catalog, Errors) {
  EXPECT_THROW(example(0), std::invalid_argument);
  EXPECT_THROW(example(9), std::invalid_argument);
  EXPECT_THROW(example(4, {.variant = "a7"}), std::invalid_argument);
  EXPECT_THROW(example(1, {.nu = 2.0}), std::invalid_argument);
  EXPECT_THROW(make_problem(InternalEnergy::zero(), ConfinementPotential::zero(),
                            InteractionKernel::gaussian(), 0.0, 1.0,
                            BoundaryKind::periodic, [](double) { return 1.0; }),
               std::invalid_argument);
  EXPECT_THROW(make_problem(InternalEnergy::zero(), ConfinementPotential::zero(),
                            InteractionKernel::zero(), 0.0, 1.0,
                            BoundaryKind::zero_flux, [](double x) { return x - 0.5; }),
               std::invalid_argument);
}

TEST(Params, Defaults) {
  const auto p = default_params();
  EXPECT_EQ(p.beta0, 5.434);
  EXPECT_EQ(p.beta1, 0.15);
  EXPECT_EQ(p.delta, 1e-12);
}

TEST(Params, Beta0LowerBound) {
  EXPECT_DOUBLE_EQ(beta0_lower_bound(1, 0.15), 2.0);
  EXPECT_DOUBLE_EQ(beta0_lower_bound(1, 0.7), 2.0);
  EXPECT_NEAR(beta0_lower_bound(2, 0.15), 8 * (1 - 0.45 + 0.0675), 1e-14);
  EXPECT_NEAR(beta0_lower_bound(2, 0.15), 4.94, 1e-12);
  EXPECT_NEAR(beta0_lower_bound(3, 0.15), 5.04, 1e-12);
  for (int k = 1; k <= 3; ++k) EXPECT_GT(5.434, beta0_lower_bound(k, 0.15));
  EXPECT_THROW(beta0_lower_bound(0, 0.15), std::invalid_argument);
}

}  // namespace
}  // namespace gradflow
