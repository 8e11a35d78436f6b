#pragma once

#include <span>
#include <vector>

#include "gradflow/quadrature.hpp"

namespace gradflow {

/// Largest supported polynomial degree. Root finding for cell minima works
/// in the monomial basis, which loses accuracy quickly beyond this.
inline constexpr int kMaxDegree = 12;

/// Scaled Legendre polynomial sqrt(2j+1) P_j(xi) (or its xi-derivative of the
/// given order, 0..2). On a cell of width h the physical basis function is
/// this value divided by sqrt(h), which makes every cell mass matrix the
/// identity.
double scaled_legendre(int j, double xi, int order = 0);

/// Monomial coefficients of scaled_legendre(j, .): row j holds c_0..c_k with
/// sqrt(2j+1) P_j(xi) = sum_n c_n xi^n.
std::vector<std::vector<double>> scaled_legendre_monomials(int degree);

/// Reference-cell tables for the orthonormal Legendre basis of degree k.
class Basis {
 public:
  /// Throws std::invalid_argument unless 0 <= degree <= kMaxDegree.
  /// gauss_points <= 0 selects k + 3; lobatto_points <= 0 selects
  /// max(2, ceil((k + 3) / 2)).
  explicit Basis(int degree, int gauss_points = 0, int lobatto_points = 0);

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }

  const QuadratureRule& gauss() const { return gauss_; }
  const QuadratureRule& lobatto() const { return lobatto_; }

  /// Lobatto weights normalized to sum to one (cell-average weights).
  std::span<const double> lobatto_average_weights() const {
    return lobatto_avg_weights_;
  }
  /// Endpoint weight omega_1 of the normalized Lobatto rule.
  double omega1() const { return lobatto_avg_weights_.front(); }

  /// Reference value of basis j (derivative order 0..2) at Gauss node q.
  double at_gauss(int q, int j, int order = 0) const {
    return gauss_table_[order][q * size() + j];
  }
  /// Reference value at Lobatto node m.
  double at_lobatto(int m, int j) const { return lobatto_table_[m * size() + j]; }
  /// Reference value at xi = -1 (side 0) or xi = +1 (side 1).
  double at_end(int side, int j, int order = 0) const {
    return end_table_[order][side * size() + j];
  }

 private:
  int degree_;
  QuadratureRule gauss_;
  QuadratureRule lobatto_;
  std::vector<double> lobatto_avg_weights_;
  std::vector<double> gauss_table_[3];
  std::vector<double> end_table_[3];
  std::vector<double> lobatto_table_;
};

}  // namespace gradflow
