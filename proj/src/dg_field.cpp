#include "gradflow/dg_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gradflow {

DGField::DGField(MeshPtr mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree) {
  if (!mesh_) throw std::invalid_argument("DGField: null mesh");
  if (degree < 0) throw std::invalid_argument("DGField: negative degree");
  coeffs_.assign(static_cast<size_t>(mesh_->n_cells) * modes(), 0.0);
}

double DGField::evaluate(int cell, double xi, int derivative_order) const {
  if (cell < 0 || cell >= n_cells()) {
    throw std::out_of_range("DGField::evaluate: cell " + std::to_string(cell) +
                            " out of range");
  }
  if (derivative_order < 0 || derivative_order > 2) {
    throw std::out_of_range("DGField::evaluate: derivative order must be 0..2");
  }
  const double h = mesh_->h;
  double sum = 0.0;
  for (int j = 0; j <= degree_; ++j) {
    sum += coeff(cell, j) * scaled_legendre(j, xi, derivative_order);
  }
  return sum * std::pow(2.0 / h, derivative_order) / std::sqrt(h);
}

double DGField::evaluate_at(double x) const {
  const auto& m = *mesh_;
  int cell = static_cast<int>(std::floor((x - m.a) / m.h));
  cell = std::clamp(cell, 0, m.n_cells - 1);
  const double xi = std::clamp(2.0 * (x - m.centers[cell]) / m.h, -1.0, 1.0);
  return evaluate(cell, xi);
}

double DGField::cell_average(int cell) const {
  return coeff(cell, 0) / std::sqrt(mesh_->h);
}

double DGField::total_mass() const {
  double sum = 0.0;
  for (int i = 0; i < n_cells(); ++i) sum += coeff(i, 0);
  return sum * std::sqrt(mesh_->h);
}

bool DGField::same_layout(const DGField& other) const {
  return mesh_ == other.mesh_ && degree_ == other.degree_;
}

DGField& DGField::operator+=(const DGField& other) { return axpy(1.0, other); }

DGField& DGField::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

DGField& DGField::axpy(double s, const DGField& other) {
  if (!same_layout(other)) {
    throw std::invalid_argument("DGField: mismatched mesh or degree");
  }
  for (size_t n = 0; n < coeffs_.size(); ++n) coeffs_[n] += s * other.coeffs_[n];
  return *this;
}

InterfaceTrace interface_trace(const DGField& field, int interface,
                               int derivative_order) {
  if (interface <= 0 || interface >= field.n_cells()) {
    throw std::out_of_range("interface_trace: interface " +
                            std::to_string(interface) +
                            " is not an interior interface");
  }
  const double left = field.evaluate(interface - 1, 1.0, derivative_order);
  const double right = field.evaluate(interface, -1.0, derivative_order);
  return {left, right, right - left, 0.5 * (left + right)};
}

DGField project_l2(const std::function<double(double)>& f, const MeshPtr& mesh,
                   const Basis& basis) {
  DGField out(mesh, basis.degree());
  const auto& g = basis.gauss();
  const double scale = 0.5 * std::sqrt(mesh->h);  // (h/2) / sqrt(h)
  std::vector<double> fx(g.size());
  for (int i = 0; i < mesh->n_cells; ++i) {
    for (int q = 0; q < g.size(); ++q) {
      fx[q] = f(mesh->to_physical(i, g.nodes[q]));
    }
    // Higher modes integrate f - f(x_0): constants project exactly.
    for (int j = 0; j < basis.size(); ++j) {
      const double shift = j == 0 ? 0.0 : fx[0];
      double s = 0.0;
      for (int q = 0; q < g.size(); ++q) {
        s += g.weights[q] * (fx[q] - shift) * basis.at_gauss(q, j);
      }
      out.coeff(i, j) = scale * s;
    }
  }
  return out;
}

double cell_average(const DGField& field, int cell) {
  if (cell < 0 || cell >= field.n_cells()) {
    throw std::out_of_range("cell_average: cell " + std::to_string(cell) +
                            " out of range");
  }
  return field.cell_average(cell);
}

}  // namespace gradflow
