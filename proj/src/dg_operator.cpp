#include "gradflow/dg_operator.hpp"

#include <array>
#include <cmath>
#include <string>

namespace gradflow {

NonPositiveDensity::NonPositiveDensity(int cell_, int node_, double value_)
    : std::domain_error("density " + std::to_string(value_) +
                        " outside the domain of H' at cell " +
                        std::to_string(cell_) + ", node " +
                        std::to_string(node_)),
      cell(cell_),
      node(node_),
      value(value_) {}

double ddg_flux(double jump_q, double mean_dq, double jump_d2q, double h,
                double beta0, double beta1) {
  return beta0 * jump_q / h + mean_dq + beta1 * h * jump_d2q;
}

CorrectedFlux correct_flux(double ddg, double mean_rho, double jump_rho) {
  if (!(mean_rho > 0.0)) return {ddg, 0.0};
  // |[rho]| <= 2 {rho} for nonnegative traces, so the ratio stays bounded
  // even when {rho} is subnormal and |ddg| / {rho} overflows.
  const double ratio = jump_rho / mean_rho;
  return {ddg + 0.5 * std::abs(ddg) * ratio, std::abs(ddg) / mean_rho};
}

namespace {

// Physical traces of a cell polynomial at its ends for derivative orders
// 0..2; side 0 is xi = -1, side 1 is xi = +1.
class EndTraces {
 public:
  EndTraces(int degree, double h) : modes_(degree + 1) {
    const double s = 1.0 / std::sqrt(h);
    for (int side = 0; side < 2; ++side) {
      const double xi = side == 0 ? -1.0 : 1.0;
      for (int order = 0; order < 3; ++order) {
        auto& row = table_[side][order];
        row.resize(modes_);
        const double scale = s * std::pow(2.0 / h, order);
        for (int j = 0; j < modes_; ++j) {
          row[j] = scale * scaled_legendre(j, xi, order);
        }
      }
    }
  }

  double basis(int side, int order, int j) const { return table_[side][order][j]; }

  double eval(const DGField& f, int cell, int side, int order) const {
    const auto c = f.cell(cell);
    const auto& row = table_[side][order];
    double sum = 0.0;
    for (int j = 0; j < modes_; ++j) sum += c[j] * row[j];
    return sum;
  }

 private:
  int modes_;
  std::array<std::array<std::vector<double>, 3>, 2> table_;
};

void check_pair(const DGField& a, const DGField& b) {
  if (!a.same_layout(b)) {
    throw std::invalid_argument("rho and q must share mesh and degree");
  }
}

InterfaceFluxData interior_data(const DGField& q, const DGField& rho,
                                const EndTraces& tr, int left, int right,
                                const SchemeParams& params) {
  const double h = q.mesh().h;
  InterfaceFluxData d;
  const double ql = tr.eval(q, left, 1, 0), qr = tr.eval(q, right, 0, 0);
  const double dql = tr.eval(q, left, 1, 1), dqr = tr.eval(q, right, 0, 1);
  const double d2ql = tr.eval(q, left, 1, 2), d2qr = tr.eval(q, right, 0, 2);
  d.jump_q = qr - ql;
  d.mean_q = 0.5 * (qr + ql);
  d.mean_dq = 0.5 * (dqr + dql);
  d.jump_d2q = d2qr - d2ql;
  d.ddg_flux = ddg_flux(d.jump_q, d.mean_dq, d.jump_d2q, h, params.beta0,
                        params.beta1);
  const double rl = tr.eval(rho, left, 1, 0), rr = tr.eval(rho, right, 0, 0);
  d.jump_rho = rr - rl;
  d.mean_rho = 0.5 * (rr + rl);
  const auto c = correct_flux(d.ddg_flux, d.mean_rho, d.jump_rho);
  d.beta_half = c.beta_half;
  d.corrected_flux = c.flux;
  return d;
}

double boundary_energy_flux(const ProblemSpec& problem, double t, double x,
                            double conv_value) {
  const double g = problem.dirichlet_data(t, x);
  return problem.confinement.v(x) + problem.internal_energy.h_prime(g) +
         conv_value;
}

}  // namespace

double ddg_flux_at(const DGField& q, int interface, const SchemeParams& params) {
  if (interface <= 0 || interface >= q.n_cells()) {
    throw std::out_of_range("ddg_flux_at: interface " +
                            std::to_string(interface) + " is on the boundary");
  }
  const EndTraces tr(q.degree(), q.mesh().h);
  return interior_data(q, q, tr, interface - 1, interface, params).ddg_flux;
}

CorrectedFlux corrected_flux_at(const DGField& q, const DGField& rho,
                                int interface, const SchemeParams& params) {
  check_pair(q, rho);
  if (interface <= 0 || interface >= q.n_cells()) {
    throw std::out_of_range("corrected_flux_at: interface " +
                            std::to_string(interface) + " is on the boundary");
  }
  const EndTraces tr(q.degree(), q.mesh().h);
  const auto d = interior_data(q, rho, tr, interface - 1, interface, params);
  return {d.corrected_flux, d.beta_half};
}

DGField compute_energy_flux(const DGField& rho, const ProblemSpec& problem,
                            const Basis& basis, const ConvolutionValues* conv) {
  const auto& mesh = rho.mesh();
  const auto& g = basis.gauss();
  const int ng = g.size();
  const int modes = basis.size();
  const bool has_kernel = !problem.kernel.is_zero();
  if (has_kernel && (conv == nullptr || conv->points_per_cell < ng)) {
    throw std::invalid_argument(
        "compute_energy_flux: convolution values required for a kernel");
  }
  const bool singular = problem.internal_energy.singular_at_zero();
  const bool has_h = !problem.internal_energy.is_zero();
  const bool has_v = !problem.confinement.is_zero();
  const auto& h_prime = problem.internal_energy.h_prime;
  const auto& v = problem.confinement.v;
  const double sqrt_h = std::sqrt(mesh.h);
  const double inv_sqrt_h = 1.0 / sqrt_h;

  DGField q(rho.mesh_ptr(), rho.degree());
  std::vector<double> f(ng);
  for (int i = 0; i < mesh.n_cells; ++i) {
    const auto c = rho.cell(i);
    for (int n = 0; n < ng; ++n) {
      double value = 0.0;
      if (has_h) {
        double r = 0.0;
        for (int j = 0; j < modes; ++j) r += c[j] * basis.at_gauss(n, j);
        r *= inv_sqrt_h;
        if (singular && !(r > 0.0)) throw NonPositiveDensity(i, n, r);
        value += h_prime(r);
      }
      if (has_v) value += v(mesh.to_physical(i, g.nodes[n]));
      if (has_kernel) value += conv->at(i, n);
      f[n] = value;
    }
    // Higher modes integrate f - f[0]; the Gauss rule annihilates constants
    // against them, so cell-wise constant data projects exactly.
    for (int j = 0; j < modes; ++j) {
      const double shift = j == 0 ? 0.0 : f[0];
      double s = 0.0;
      for (int n = 0; n < ng; ++n) {
        s += g.weights[n] * (f[n] - shift) * basis.at_gauss(n, j);
      }
      q.coeff(i, j) = 0.5 * sqrt_h * s;
    }
  }
  return q;
}

std::vector<InterfaceFluxData> interface_fluxes(const DGField& rho,
                                                const DGField& q,
                                                const ProblemSpec& problem,
                                                const SchemeParams& params,
                                                double t,
                                                const ConvolutionValues* conv) {
  check_pair(rho, q);
  const int n = rho.n_cells();
  const double h = rho.mesh().h;
  const EndTraces tr(rho.degree(), h);
  std::vector<InterfaceFluxData> out(n + 1);
  for (int s = 1; s < n; ++s) out[s] = interior_data(q, rho, tr, s - 1, s, params);

  switch (problem.bc) {
    case BoundaryKind::periodic:
      out[0] = interior_data(q, rho, tr, n - 1, 0, params);
      out[n] = out[0];
      break;
    case BoundaryKind::zero_flux: {
      auto& lo = out[0];
      lo.mean_q = tr.eval(q, 0, 0, 0);
      lo.mean_rho = tr.eval(rho, 0, 0, 0);
      auto& hi = out[n];
      hi.mean_q = tr.eval(q, n - 1, 1, 0);
      hi.mean_rho = tr.eval(rho, n - 1, 1, 0);
      break;
    }
    case BoundaryKind::dirichlet: {
      const bool has_kernel = !problem.kernel.is_zero();
      if (has_kernel && (conv == nullptr || conv->points_per_cell < 2)) {
        throw std::invalid_argument(
            "interface_fluxes: Dirichlet boundary with a kernel needs "
            "endpoint convolution values");
      }
      const int np = has_kernel ? conv->points_per_cell : 0;
      const double conv_a = has_kernel ? conv->at(0, np - 2) : 0.0;
      const double conv_b = has_kernel ? conv->at(n - 1, np - 1) : 0.0;
      const double qa = boundary_energy_flux(problem, t, problem.a, conv_a);
      const double qb = boundary_energy_flux(problem, t, problem.b, conv_b);

      auto& lo = out[0];
      const double q_plus = tr.eval(q, 0, 0, 0);
      lo.jump_q = q_plus - qa;
      lo.mean_dq = tr.eval(q, 0, 0, 1);
      lo.ddg_flux = params.beta0 * lo.jump_q / h + lo.mean_dq;
      lo.mean_q = q_plus - 0.5 * lo.jump_q;
      lo.mean_rho = problem.dirichlet_data(t, problem.a);
      lo.corrected_flux = lo.ddg_flux;

      auto& hi = out[n];
      const double q_minus = tr.eval(q, n - 1, 1, 0);
      hi.jump_q = qb - q_minus;
      hi.mean_dq = tr.eval(q, n - 1, 1, 1);
      hi.ddg_flux = params.beta0 * hi.jump_q / h + hi.mean_dq;
      hi.mean_q = q_minus + 0.5 * hi.jump_q;
      hi.mean_rho = problem.dirichlet_data(t, problem.b);
      hi.corrected_flux = hi.ddg_flux;
      break;
    }
  }
  return out;
}

DGField assemble_rhs(const DGField& rho, const DGField& q,
                     const ProblemSpec& problem, const Basis& basis,
                     const SchemeParams& params, FluxMode mode, double t,
                     const ConvolutionValues* conv) {
  return assemble_rhs(rho, q, interface_fluxes(rho, q, problem, params, t, conv),
                      problem, basis, mode);
}

DGField assemble_rhs(const DGField& rho, const DGField& q,
                     const std::vector<InterfaceFluxData>& fluxes,
                     const ProblemSpec& problem, const Basis& basis,
                     FluxMode mode) {
  check_pair(rho, q);
  if (static_cast<int>(fluxes.size()) != rho.n_cells() + 1) {
    throw std::invalid_argument("assemble_rhs: need one entry per interface");
  }
  const auto& mesh = rho.mesh();
  const int n = mesh.n_cells;
  const int modes = basis.size();
  const double h = mesh.h;
  const auto& g = basis.gauss();
  const int ng = g.size();
  DGField rhs(rho.mesh_ptr(), rho.degree());

  // Volume term: -int rho q_x phi_j' dx. With phi = P/sqrt(h) and
  // d/dx = (2/h) d/dxi the cell integral is -2 h^{-5/2} sum_n w_n r q' P_j'.
  const double vol_scale = -2.0 / (h * h * std::sqrt(h));
  if (modes > 1) {
    std::vector<double> flux(ng);
    for (int i = 0; i < n; ++i) {
      const auto cr = rho.cell(i);
      const auto cq = q.cell(i);
      for (int m = 0; m < ng; ++m) {
        double r = 0.0, dq = 0.0;
        for (int j = 0; j < modes; ++j) {
          r += cr[j] * basis.at_gauss(m, j);
          dq += cq[j] * basis.at_gauss(m, j, 1);
        }
        flux[m] = g.weights[m] * r * dq;
      }
      for (int j = 1; j < modes; ++j) {
        double s = 0.0;
        for (int m = 0; m < ng; ++m) s += flux[m] * basis.at_gauss(m, j, 1);
        rhs.coeff(i, j) = vol_scale * s;
      }
    }
  }

  const EndTraces tr(rho.degree(), h);
  const bool periodic = problem.bc == BoundaryKind::periodic;

  auto add_left_cell = [&](int cell, const InterfaceFluxData& d, double flux) {
    // right end of `cell`: + {rho} F phi_j + {rho} phi_j' (q^- - {q})
    const double q_minus = tr.eval(q, cell, 1, 0);
    const double a = d.mean_rho * flux;
    const double b = d.mean_rho * (q_minus - d.mean_q);
    for (int j = 0; j < modes; ++j) {
      rhs.coeff(cell, j) += a * tr.basis(1, 0, j) + b * tr.basis(1, 1, j);
    }
  };
  auto add_right_cell = [&](int cell, const InterfaceFluxData& d, double flux) {
    // left end of `cell`: - {rho} F phi_j - {rho} phi_j' (q^+ - {q})
    const double q_plus = tr.eval(q, cell, 0, 0);
    const double a = d.mean_rho * flux;
    const double b = d.mean_rho * (q_plus - d.mean_q);
    for (int j = 0; j < modes; ++j) {
      rhs.coeff(cell, j) -= a * tr.basis(0, 0, j) + b * tr.basis(0, 1, j);
    }
  };

  const bool corrected = mode == FluxMode::corrected;
  for (int s = 0; s <= n; ++s) {
    const auto& d = fluxes[s];
    const bool interior = (s > 0 && s < n) || periodic;
    if (corrected && interior && d.mean_rho < 0.0) {
      throw std::domain_error("assemble_rhs: negative mean density at interface " +
                              std::to_string(s));
    }
    const double flux = (corrected && interior) ? d.corrected_flux : d.ddg_flux;
    if (interior) {
      if (periodic && s == n) continue;  // seam handled at s == 0
      const int left = s == 0 ? n - 1 : s - 1;
      const int right = s == n ? 0 : s;
      add_left_cell(left, d, flux);
      add_right_cell(right, d, flux);
    } else if (problem.bc == BoundaryKind::dirichlet) {
      if (s == 0) {
        add_right_cell(0, d, flux);
      } else {
        add_left_cell(n - 1, d, flux);
      }
    }
    // zero flux: both boundary terms vanish identically
  }
  return rhs;
}

double discrete_energy(const DGField& rho, const ProblemSpec& problem,
                       const Basis& basis, const ConvolutionValues* conv) {
  const auto& mesh = rho.mesh();
  const auto& g = basis.gauss();
  const int ng = g.size();
  const bool has_kernel = !problem.kernel.is_zero();
  if (has_kernel && (conv == nullptr || conv->points_per_cell < ng)) {
    throw std::invalid_argument(
        "discrete_energy: convolution values required for a kernel");
  }
  const bool singular = problem.internal_energy.singular_at_zero();
  const bool has_h = !problem.internal_energy.is_zero();
  const bool has_v = !problem.confinement.is_zero();
  const double inv_sqrt_h = 1.0 / std::sqrt(mesh.h);
  double e = 0.0;
  for (int i = 0; i < mesh.n_cells; ++i) {
    const auto c = rho.cell(i);
    double cell_sum = 0.0;
    for (int m = 0; m < ng; ++m) {
      double r = 0.0;
      for (int j = 0; j < basis.size(); ++j) r += c[j] * basis.at_gauss(m, j);
      r *= inv_sqrt_h;
      double density = 0.0;
      if (has_h) {
        if (singular && !(r > 0.0)) throw NonPositiveDensity(i, m, r);
        density += problem.internal_energy.h(r);
      }
      if (has_v) density += problem.confinement.v(mesh.to_physical(i, g.nodes[m])) * r;
      if (has_kernel) density += 0.5 * r * conv->at(i, m);
      cell_sum += g.weights[m] * density;
    }
    e += cell_sum;
  }
  return 0.5 * mesh.h * e;
}

double energy_norm(const DGField& q, const DGField& rho, const Basis& basis) {
  check_pair(q, rho);
  const auto& mesh = rho.mesh();
  const auto& g = basis.gauss();
  const double h = mesh.h;
  const double inv_sqrt_h = 1.0 / std::sqrt(h);
  const double dscale = 2.0 / h * inv_sqrt_h;
  double volume = 0.0;
  for (int i = 0; i < mesh.n_cells; ++i) {
    for (int m = 0; m < g.size(); ++m) {
      double r = 0.0, dq = 0.0;
      for (int j = 0; j < basis.size(); ++j) {
        r += rho.coeff(i, j) * basis.at_gauss(m, j);
        dq += q.coeff(i, j) * basis.at_gauss(m, j, 1);
      }
      r *= inv_sqrt_h;
      dq *= dscale;
      volume += g.weights[m] * r * dq * dq;
    }
  }
  volume *= 0.5 * h;
  double jumps = 0.0;
  for (int s = 1; s < mesh.n_cells; ++s) {
    const auto tq = interface_trace(q, s);
    const auto tr = interface_trace(rho, s);
    jumps += tr.mean * tq.jump * tq.jump / h;
  }
  const double radicand = volume + jumps;
  if (radicand < 0.0) {
    throw std::domain_error("energy_norm: negative radicand (rho < 0)");
  }
  return std::sqrt(radicand);
}

}  // namespace gradflow
