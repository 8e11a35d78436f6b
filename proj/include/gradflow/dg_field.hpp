#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gradflow/basis.hpp"
#include "gradflow/mesh.hpp"

namespace gradflow {

/// Piecewise polynomial of degree k on a Mesh1D, stored cell-major as
/// coefficients in the orthonormal Legendre basis.
class DGField {
 public:
  DGField() = default;
  DGField(MeshPtr mesh, int degree);

  const Mesh1D& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  int n_cells() const { return mesh_->n_cells; }
  int modes() const { return degree_ + 1; }

  double& coeff(int cell, int j) { return coeffs_[cell * modes() + j]; }
  double coeff(int cell, int j) const { return coeffs_[cell * modes() + j]; }
  std::span<double> cell(int i) {
    return {coeffs_.data() + i * modes(), static_cast<size_t>(modes())};
  }
  std::span<const double> cell(int i) const {
    return {coeffs_.data() + i * modes(), static_cast<size_t>(modes())};
  }
  std::vector<double>& coeffs() { return coeffs_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  /// Value (or physical derivative of order 0..2) at reference point xi of
  /// a cell. Throws std::out_of_range for a bad cell or order.
  double evaluate(int cell, double xi, int derivative_order = 0) const;
  /// Value at a physical point; the right-hand cell wins at interfaces.
  double evaluate_at(double x) const;

  /// (1/h) * integral over the cell.
  double cell_average(int cell) const;
  /// Integral over the whole domain.
  double total_mass() const;

  DGField& operator+=(const DGField& other);
  DGField& operator*=(double s);
  /// this += s * other
  DGField& axpy(double s, const DGField& other);
  bool same_layout(const DGField& other) const;

 private:
  MeshPtr mesh_;
  int degree_ = 0;
  std::vector<double> coeffs_;
};

/// Traces of a field at an interior interface x_{i+1/2}, i in 1..N-1.
struct InterfaceTrace {
  double left;   // limit from cell i-1 (0-based: interface index - 1)
  double right;  // limit from the cell to the right
  double jump;   // right - left
  double mean;   // (right + left) / 2
};

/// Interior interface traces. Throws std::out_of_range for 0 or N.
InterfaceTrace interface_trace(const DGField& field, int interface,
                               int derivative_order = 0);

/// Cell-wise L2 projection of f using the basis' Gauss rule.
DGField project_l2(const std::function<double(double)>& f, const MeshPtr& mesh,
                   const Basis& basis);

/// Free-function form of DGField::cell_average with range checking.
double cell_average(const DGField& field, int cell);

}  // namespace gradflow
