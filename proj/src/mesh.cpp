#include "gradflow/mesh.hpp"

#include <stdexcept>
#include <string>

namespace gradflow {

MeshPtr build_mesh(double a, double b, int n_cells) {
  if (n_cells < 2) {
    throw std::invalid_argument("build_mesh: need at least 2 cells, got " +
                                std::to_string(n_cells));
  }
  if (!(b > a)) {
    throw std::invalid_argument("build_mesh: right endpoint must exceed left");
  }
  auto mesh = std::make_shared<Mesh1D>();
  mesh->a = a;
  mesh->b = b;
  mesh->n_cells = n_cells;
  mesh->h = (b - a) / n_cells;
  mesh->interfaces.resize(n_cells + 1);
  for (int i = 0; i <= n_cells; ++i) {
    mesh->interfaces[i] = a + (b - a) * (static_cast<double>(i) / n_cells);
  }
  mesh->interfaces.back() = b;
  mesh->centers.resize(n_cells);
  for (int i = 0; i < n_cells; ++i) {
    mesh->centers[i] = 0.5 * (mesh->interfaces[i] + mesh->interfaces[i + 1]);
  }
  return mesh;
}

}  // namespace gradflow
