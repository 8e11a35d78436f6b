#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gradflow/basis.hpp"
#include "gradflow/convolution.hpp"
#include "gradflow/dg_field.hpp"
#include "gradflow/problem.hpp"

namespace gradflow {

/// Raised when H' or H is evaluated outside its domain (rho <= 0 for the
/// entropy). Carries the offending location.
class NonPositiveDensity : public std::domain_error {
 public:
  NonPositiveDensity(int cell, int node, double value);
  int cell;
  int node;
  double value;
};

enum class FluxMode { plain, corrected };

/// Everything the scheme computes at one interface x_{i+1/2}.
struct InterfaceFluxData {
  double jump_q = 0.0;
  double mean_q = 0.0;
  double mean_dq = 0.0;
  double jump_d2q = 0.0;
  double ddg_flux = 0.0;
  double jump_rho = 0.0;
  double mean_rho = 0.0;
  double beta_half = 0.0;
  double corrected_flux = 0.0;
};

/// beta0 [q] / h + {q_x} + beta1 h [q_xx]
double ddg_flux(double jump_q, double mean_dq, double jump_d2q, double h,
                double beta0, double beta1);

struct CorrectedFlux {
  double flux;
  double beta_half;
};
/// flux + beta_half [rho] / 2 with beta_half = |flux| / {rho} ({rho} > 0), 0
/// when {rho} == 0.
CorrectedFlux correct_flux(double ddg, double mean_rho, double jump_rho);

/// DDG flux at an interior interface (1..N-1). Throws std::out_of_range for
/// boundary indices.
double ddg_flux_at(const DGField& q, int interface, const SchemeParams& params);
CorrectedFlux corrected_flux_at(const DGField& q, const DGField& rho,
                                int interface, const SchemeParams& params);

/// Projection of V + H'(rho_h) + W * rho_h. conv may be null when W == 0;
/// otherwise it must hold values at the basis Gauss nodes (first points).
DGField compute_energy_flux(const DGField& rho, const ProblemSpec& problem,
                            const Basis& basis, const ConvolutionValues* conv);

/// Interface data for all N + 1 interfaces. Boundary entries follow the
/// problem's boundary kind; for periodic problems entries 0 and N coincide.
/// conv is needed for Dirichlet boundaries with a kernel (endpoint values).
std::vector<InterfaceFluxData> interface_fluxes(
    const DGField& rho, const DGField& q, const ProblemSpec& problem,
    const SchemeParams& params, double t = 0.0,
    const ConvolutionValues* conv = nullptr);

/// Time derivative of rho's coefficients. Throws std::domain_error in
/// corrected mode when some interface has a negative mean density.
DGField assemble_rhs(const DGField& rho, const DGField& q,
                     const ProblemSpec& problem, const Basis& basis,
                     const SchemeParams& params, FluxMode mode, double t = 0.0,
                     const ConvolutionValues* conv = nullptr);

/// Same, reusing interface data computed by interface_fluxes for this rho
/// and q.
DGField assemble_rhs(const DGField& rho, const DGField& q,
                     const std::vector<InterfaceFluxData>& fluxes,
                     const ProblemSpec& problem, const Basis& basis,
                     FluxMode mode);

/// Free energy of rho_h evaluated with the basis Gauss rule.
double discrete_energy(const DGField& rho, const ProblemSpec& problem,
                       const Basis& basis, const ConvolutionValues* conv);

/// sqrt(sum_i int rho |q_x|^2 + sum_{interior} {rho} [q]^2 / h)
double energy_norm(const DGField& q, const DGField& rho, const Basis& basis);

}  // namespace gradflow
