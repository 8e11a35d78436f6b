#pragma once

#include <memory>
#include <vector>

namespace gradflow {

/// Uniform partition of [a, b] into n_cells cells I_i = (x_{i-1/2}, x_{i+1/2}).
struct Mesh1D {
  double a = 0.0;
  double b = 1.0;
  int n_cells = 0;
  double h = 0.0;
  std::vector<double> interfaces;  // n_cells + 1 entries, interfaces[0] == a
  std::vector<double> centers;     // n_cells entries

  /// Physical coordinate of reference point xi in [-1, 1] of the given cell.
  double to_physical(int cell, double xi) const {
    return centers[cell] + 0.5 * h * xi;
  }
  double length() const { return b - a; }
};

using MeshPtr = std::shared_ptr<const Mesh1D>;

/// Throws std::invalid_argument unless b > a and n_cells >= 2.
MeshPtr build_mesh(double a, double b, int n_cells);

}  // namespace gradflow
