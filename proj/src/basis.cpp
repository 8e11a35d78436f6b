#include "gradflow/basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gradflow {

double scaled_legendre(int j, double xi, int order) {
  const auto v = legendre(j, xi);
  const double s = std::sqrt(2.0 * j + 1.0);
  switch (order) {
    case 0: return s * v.p;
    case 1: return s * v.dp;
    case 2: return s * v.d2p;
    default: throw std::out_of_range("scaled_legendre: derivative order > 2");
  }
}

std::vector<std::vector<double>> scaled_legendre_monomials(int degree) {
  std::vector<std::vector<double>> p(degree + 1,
                                     std::vector<double>(degree + 1, 0.0));
  p[0][0] = 1.0;
  if (degree >= 1) p[1][1] = 1.0;
  for (int n = 1; n < degree; ++n) {
    for (int c = 0; c <= degree; ++c) {
      double v = -n * p[n - 1][c];
      if (c > 0) v += (2 * n + 1) * p[n][c - 1];
      p[n + 1][c] = v / (n + 1);
    }
  }
  for (int n = 0; n <= degree; ++n) {
    const double s = std::sqrt(2.0 * n + 1.0);
    for (double& c : p[n]) c *= s;
  }
  return p;
}

Basis::Basis(int degree, int gauss_points, int lobatto_points)
    : degree_(degree) {
  if (degree < 0 || degree > kMaxDegree) {
    throw std::invalid_argument("Basis: degree must lie in [0, " +
                                std::to_string(kMaxDegree) + "]");
  }
  const int ng = gauss_points > 0 ? gauss_points : degree + 3;
  const int min_lobatto = std::max(2, (degree + 4) / 2);  // ceil((k+3)/2)
  const int nl = lobatto_points > 0 ? lobatto_points : min_lobatto;
  if (nl < min_lobatto) {
    throw std::invalid_argument(
        "Basis: Lobatto rule too small to reproduce cell averages");
  }
  gauss_ = gauss_legendre(ng);
  lobatto_ = gauss_lobatto(nl);
  for (double w : lobatto_.weights) lobatto_avg_weights_.push_back(0.5 * w);

  const int s = size();
  for (int order = 0; order < 3; ++order) {
    gauss_table_[order].resize(ng * s);
    for (int q = 0; q < ng; ++q)
      for (int j = 0; j < s; ++j)
        gauss_table_[order][q * s + j] =
            scaled_legendre(j, gauss_.nodes[q], order);
    end_table_[order].resize(2 * s);
    for (int j = 0; j < s; ++j) {
      end_table_[order][j] = scaled_legendre(j, -1.0, order);
      end_table_[order][s + j] = scaled_legendre(j, 1.0, order);
    }
  }
  lobatto_table_.resize(nl * s);
  for (int m = 0; m < nl; ++m)
    for (int j = 0; j < s; ++j)
      lobatto_table_[m * s + j] = scaled_legendre(j, lobatto_.nodes[m]);
}

}  // namespace gradflow
