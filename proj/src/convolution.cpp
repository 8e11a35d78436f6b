#include "gradflow/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gradflow {

namespace {

// Nodes per smooth sub-interval. Kernels are analytic on every piece, and the
// cells are at most a few kernel length scales wide.
constexpr int kMomentNodes = 20;
// |c| beyond which ln|c - eta| is analytic well outside [-1, 1] and Gauss
// quadrature beats the cancellation-prone closed form.
constexpr double kLogExactRadius = 3.0;

const QuadratureRule& moment_rule() {
  static const QuadratureRule rule = gauss_legendre(kMomentNodes);
  return rule;
}

// Antiderivative of u^r ln|u|, continuous at u = 0.
double log_power_antiderivative(int r, double u) {
  if (u == 0.0) return 0.0;
  const double n = r + 1.0;
  return std::pow(u, r + 1) / n * (std::log(std::abs(u)) - 1.0 / n);
}

double binomial(int n, int r) {
  double out = 1.0;
  for (int i = 1; i <= r; ++i) out = out * (n - r + i) / i;
  return out;
}

// integral_{lo}^{hi} f(eta) P_j(eta) d eta with Gauss on [lo, hi].
template <typename F>
double gauss_segment(F&& f, int j, double lo, double hi) {
  const auto& rule = moment_rule();
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double s = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const double eta = mid + half * rule.nodes[q];
    s += rule.weights[q] * f(eta) * scaled_legendre(j, eta);
  }
  return half * s;
}

}  // namespace

double log_monomial_moment(int l, double c) {
  // eta = c - u:  integral_{c-1}^{c+1} (c - u)^l ln|u| du
  double sum = 0.0;
  for (int r = 0; r <= l; ++r) {
    const double coef =
        binomial(l, r) * std::pow(c, l - r) * ((r % 2 == 0) ? 1.0 : -1.0);
    sum += coef * (log_power_antiderivative(r, c + 1.0) -
                   log_power_antiderivative(r, c - 1.0));
  }
  return sum;
}

double kernel_moment(const InteractionKernel& kernel, int offset, double xi,
                     int j, double h) {
  if (kernel.is_zero()) return 0.0;
  const double half_h = 0.5 * h;
  // x - y = offset * h + (h/2)(xi - eta) for y at reference point eta.
  const auto arg = [=](double eta) { return offset * h + half_h * (xi - eta); };
  double integral = 0.0;

  // Smooth part, split at kink preimages.
  const double lo_arg = arg(1.0);
  const double hi_arg = arg(-1.0);
  const double radius = kernel.support_radius;
  const bool outside = std::isfinite(radius) &&
                       (lo_arg >= radius || hi_arg <= -radius);
  if (!outside) {
    std::vector<double> cuts{-1.0, 1.0};
    for (double kink : kernel.kinks) {
      const double eta = xi + (offset * h - kink) / half_h;
      if (eta > -1.0 && eta < 1.0) cuts.push_back(eta);
    }
    std::sort(cuts.begin(), cuts.end());
    const auto& smooth = kernel.smooth;
    for (size_t s = 0; s + 1 < cuts.size(); ++s) {
      if (cuts[s + 1] - cuts[s] <= 0.0) continue;
      integral += gauss_segment([&](double eta) { return smooth(arg(eta)); }, j,
                                cuts[s], cuts[s + 1]);
    }
  }

  if (kernel.has_log_singularity()) {
    // ln|x - y| = ln(h/2) + ln|c - eta|, c = 2 offset + xi
    const double c = 2.0 * offset + xi;
    double log_part = 0.0;
    if (std::abs(c) <= kLogExactRadius) {
      const auto mono = scaled_legendre_monomials(j);
      for (int l = 0; l <= j; ++l) {
        if (mono[j][l] != 0.0) log_part += mono[j][l] * log_monomial_moment(l, c);
      }
    } else {
      log_part = gauss_segment(
          [c](double eta) { return std::log(std::abs(c - eta)); }, j, -1.0, 1.0);
    }
    if (j == 0) log_part += 2.0 * std::log(half_h);
    integral += kernel.log_coefficient * log_part;
  }
  return integral * half_h / std::sqrt(h);
}

KernelMomentTable::KernelMomentTable(const InteractionKernel& kernel,
                                     MeshPtr mesh, const Basis& basis,
                                     std::vector<double> eval_points)
    : mesh_(std::move(mesh)),
      modes_(basis.size()),
      eval_points_(std::move(eval_points)) {
  for (double xi : eval_points_) {
    if (xi < -1.0 || xi > 1.0) {
      throw std::invalid_argument(
          "KernelMomentTable: evaluation points must lie in [-1, 1]");
    }
  }
  if (kernel.is_zero()) return;
  if (kernel.kind == InteractionKernel::Kind::custom && kernel.w) {
    for (double x : {0.3, 0.7, 1.9, 3.1}) {
      if (std::abs(kernel.w(x) - kernel.w(-x)) >
          1e-12 * (1.0 + std::abs(kernel.w(x)))) {
        throw std::invalid_argument("KernelMomentTable: kernel not symmetric");
      }
    }
  }
  const int n = mesh_->n_cells;
  const int np = points_per_cell();
  const double h = mesh_->h;
  std::vector<double> full(static_cast<size_t>(2 * n - 1) * np * modes_);
  int lo = n, hi = -n;
  for (int d = -(n - 1); d <= n - 1; ++d) {
    bool any = false;
    for (int p = 0; p < np; ++p) {
      for (int j = 0; j < modes_; ++j) {
        const double v = kernel_moment(kernel, d, eval_points_[p], j, h);
        full[((d + n - 1) * np + p) * modes_ + j] = v;
        any = any || v != 0.0;
      }
    }
    if (any) {
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  if (lo > hi) return;
  zero_ = false;
  min_offset_ = lo;
  max_offset_ = hi;
  const auto first = full.begin() + static_cast<long>((lo + n - 1) * np * modes_);
  const auto last = full.begin() + static_cast<long>((hi + n) * np * modes_);
  table_.assign(first, last);
}

KernelMomentTable build_moment_table(const InteractionKernel& kernel,
                                     const MeshPtr& mesh, const Basis& basis,
                                     std::vector<double> eval_points) {
  return KernelMomentTable(kernel, mesh, basis, std::move(eval_points));
}

KernelMomentTable build_moment_table(const InteractionKernel& kernel,
                                     const MeshPtr& mesh, const Basis& basis) {
  std::vector<double> points = basis.gauss().nodes;
  points.push_back(-1.0);
  points.push_back(1.0);
  return build_moment_table(kernel, mesh, basis, std::move(points));
}

ConvolutionValues convolve(const KernelMomentTable& table, const DGField& rho) {
  if (rho.mesh_ptr() != table.mesh_ptr() || rho.modes() != table.modes()) {
    throw std::invalid_argument("convolve: field and moment table mismatch");
  }
  const int n = rho.n_cells();
  const int np = table.points_per_cell();
  ConvolutionValues out;
  out.points_per_cell = np;
  out.values.assign(static_cast<size_t>(n) * np, 0.0);
  if (table.is_zero()) return out;
  const int modes = table.modes();
  for (int i = 0; i < n; ++i) {
    const int m_lo = std::max(0, i - table.max_offset());
    const int m_hi = std::min(n - 1, i - table.min_offset());
    for (int p = 0; p < np; ++p) {
      double s = 0.0;
      for (int m = m_lo; m <= m_hi; ++m) {
        const auto c = rho.cell(m);
        for (int j = 0; j < modes; ++j) s += table.moment(i - m, p, j) * c[j];
      }
      out.values[i * np + p] = s;
    }
  }
  return out;
}

double interaction_energy(const KernelMomentTable& table, const DGField& rho,
                          const Basis& basis) {
  if (table.is_zero()) return 0.0;
  const auto& g = basis.gauss();
  const auto pts = table.eval_points();
  if (static_cast<int>(pts.size()) < g.size() ||
      !std::equal(g.nodes.begin(), g.nodes.end(), pts.begin())) {
    throw std::invalid_argument(
        "interaction_energy: table must start with the basis Gauss nodes");
  }
  const auto conv = convolve(table, rho);
  const double h = rho.mesh().h;
  const double inv_sqrt_h = 1.0 / std::sqrt(h);
  double e = 0.0;
  for (int i = 0; i < rho.n_cells(); ++i) {
    for (int q = 0; q < g.size(); ++q) {
      double r = 0.0;
      for (int j = 0; j < basis.size(); ++j) r += rho.coeff(i, j) * basis.at_gauss(q, j);
      e += g.weights[q] * r * inv_sqrt_h * conv.at(i, q);
    }
  }
  return 0.25 * h * e;  // (1/2) * (h/2)
}

}  // namespace gradflow
