#pragma once

#include <vector>

namespace gradflow {

/// Nodes and weights on the reference interval [-1, 1]; weights sum to 2.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

/// n-point Gauss-Legendre rule, exact through degree 2n - 1.
QuadratureRule gauss_legendre(int n);

/// n-point Gauss-Lobatto rule (n >= 2), exact through degree 2n - 3.
/// Nodes are sorted, with nodes.front() == -1 and nodes.back() == 1.
QuadratureRule gauss_lobatto(int n);

/// Legendre polynomial P_n and its first two derivatives at x.
struct LegendreValue {
  double p;
  double dp;
  double d2p;
};
LegendreValue legendre(int n, double x);

}  // namespace gradflow
