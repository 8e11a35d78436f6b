#include "gradflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gradflow {

LegendreValue legendre(int n, double x) {
  if (n < 0) throw std::invalid_argument("legendre: negative degree");
  // Three-term recurrences for P_n, P_n' and P_n''.
  double p0 = 1.0, p1 = x;
  double d0 = 0.0, d1 = 1.0;
  double s0 = 0.0, s1 = 0.0;
  if (n == 0) return {1.0, 0.0, 0.0};
  for (int m = 1; m < n; ++m) {
    const double p2 = ((2 * m + 1) * x * p1 - m * p0) / (m + 1);
    const double d2 = d0 + (2 * m + 1) * p1;
    const double s2 = s0 + (2 * m + 1) * d1;
    p0 = p1, p1 = p2;
    d0 = d1, d1 = d2;
    s0 = s1, s1 = s2;
  }
  return {p1, d1, s1};
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto v = legendre(n, x);
      const double dx = v.p / v.dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).dp;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_lobatto(int n) {
  if (n < 2) throw std::invalid_argument("gauss_lobatto: need n >= 2");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = n - 1;  // interior nodes are the roots of P_m'
  rule.nodes.front() = -1.0;
  rule.nodes.back() = 1.0;
  for (int i = 1; i <= (n - 1) / 2; ++i) {
    double x = -std::cos(std::numbers::pi * i / m);
    for (int it = 0; it < 100; ++it) {
      const auto v = legendre(m, x);
      const double dx = v.dp / v.d2p;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.nodes[n - 1 - i] = -x;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = legendre(m, rule.nodes[i]).p;
    rule.weights[i] = 2.0 / (n * m * p * p);
  }
  return rule;
}

}  // namespace gradflow
