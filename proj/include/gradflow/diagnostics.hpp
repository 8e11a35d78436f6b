#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradflow/basis.hpp"
#include "gradflow/dg_field.hpp"
#include "gradflow/problem.hpp"
#include "gradflow/solver.hpp"

namespace gradflow {

struct ErrorNorms {
  double l2 = 0.0;
  double linf = 0.0;
};

/// L2 error with degree + 3 Gauss nodes per cell; Linf as the maximum over
/// 2 degree + 5 Chebyshev points per cell plus both cell ends.
ErrorNorms error_norms(const DGField& rho,
                       const std::function<double(double)>& reference);

/// Reference points used for Linf sampling: -1, the 2 degree + 5 Chebyshev
/// (first kind) nodes in ascending order, +1.
std::vector<double> linf_sample_points(int degree);

struct ConvergenceRow {
  int n_cells = 0;
  double l2_error = 0.0;
  std::optional<double> l2_order;  // empty on the coarsest row
  double linf_error = 0.0;
  std::optional<double> linf_order;
};

/// log(err_coarse / err_fine) / log(n_fine / n_coarse); equals log2 of the
/// error ratio for successive halvings of h.
double observed_order(double err_coarse, double err_fine, int n_coarse,
                      int n_fine);

/// Computes orders for rows already holding errors.
void fill_orders(std::vector<ConvergenceRow>& rows);

/// One independent run per mesh size, executed concurrently. Requires an
/// exact solution and a strictly increasing n_list.
std::vector<ConvergenceRow> convergence_study(const ProblemSpec& problem,
                                              int degree,
                                              const std::vector<int>& n_list,
                                              double t_final,
                                              SchemeParams params);

struct SteadyStateReport {
  double q_variance = 0.0;  // max over components of (max q - min q)
  int support_components = 0;
};

/// Support = cells with average above threshold; components are maximal
/// runs of contiguous support cells. q is sampled at the Linf points.
SteadyStateReport steady_state_report(const DGField& rho, const DGField& q,
                                      double support_threshold = 1e-6);

// CSV output. Every real is written with 17 significant digits, which makes
// the text round-trip exactly.

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void emit_timeseries(const std::filesystem::path& path,
                     const std::vector<DiagRecord>& records);
std::vector<DiagRecord> read_timeseries(const std::filesystem::path& path);

/// Columns cell, x, rho, q at the basis Lobatto points of every cell.
void emit_snapshot(const std::filesystem::path& path, const DGField& rho,
                   const DGField& q, const Basis& basis);
/// "snapshot_t<t>.csv" with t printed in shortest round-trip form.
std::string snapshot_filename(double t);

void emit_convergence(const std::filesystem::path& path,
                      const std::vector<ConvergenceRow>& rows);
std::vector<ConvergenceRow> read_convergence(const std::filesystem::path& path);

/// printf("%.17g"): parses back to exactly `v`.
std::string format_real(double v);

}  // namespace gradflow
