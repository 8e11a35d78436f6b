#pragma once

#include <span>
#include <vector>

#include "gradflow/basis.hpp"
#include "gradflow/dg_field.hpp"
#include "gradflow/problem.hpp"

namespace gradflow {

/// Values of W * rho_h at a fixed set of reference points in every cell,
/// stored cell-major: values[i * points_per_cell + p].
struct ConvolutionValues {
  int points_per_cell = 0;
  std::vector<double> values;

  double at(int cell, int point) const {
    return values[cell * points_per_cell + point];
  }
  bool empty() const { return values.empty(); }
};

/// Moment of the kernel against basis function j of a source cell:
///   integral over I_m of W(x - y) phi_{m,j}(y) dy
/// where x sits at reference point xi of cell m + offset. Only the offset,
/// xi and h matter on a uniform mesh.
double kernel_moment(const InteractionKernel& kernel, int offset, double xi,
                     int j, double h);

/// Exact integral of eta^l ln|c - eta| over [-1, 1].
double log_monomial_moment(int l, double c);

/// Precomputed translation-invariant kernel moments on a uniform mesh.
class KernelMomentTable {
 public:
  KernelMomentTable() = default;
  KernelMomentTable(const InteractionKernel& kernel, MeshPtr mesh,
                    const Basis& basis, std::vector<double> eval_points);

  const Mesh1D& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  int modes() const { return modes_; }
  std::span<const double> eval_points() const { return eval_points_; }
  int points_per_cell() const { return static_cast<int>(eval_points_.size()); }
  /// Offsets outside [min_offset, max_offset] have identically zero moments.
  int min_offset() const { return min_offset_; }
  int max_offset() const { return max_offset_; }
  bool is_zero() const { return zero_; }

  double moment(int offset, int point, int j) const {
    return table_[((offset - min_offset_) * points_per_cell() + point) * modes_ +
                  j];
  }

 private:
  MeshPtr mesh_;
  int modes_ = 0;
  std::vector<double> eval_points_;
  int min_offset_ = 0;
  int max_offset_ = -1;
  bool zero_ = true;
  std::vector<double> table_;
};

/// Registers the basis Gauss nodes followed by the two cell endpoints.
KernelMomentTable build_moment_table(const InteractionKernel& kernel,
                                     const MeshPtr& mesh, const Basis& basis);
KernelMomentTable build_moment_table(const InteractionKernel& kernel,
                                     const MeshPtr& mesh, const Basis& basis,
                                     std::vector<double> eval_points);

/// W * rho_h at every registered point. Throws std::invalid_argument when rho
/// lives on a different mesh or degree.
ConvolutionValues convolve(const KernelMomentTable& table, const DGField& rho);

/// (1/2) sum_i integral_{I_i} rho_h (W * rho_h) dx with the basis Gauss rule.
/// The table's first points must be the basis Gauss nodes.
double interaction_energy(const KernelMomentTable& table, const DGField& rho,
                          const Basis& basis);

}  // namespace gradflow
