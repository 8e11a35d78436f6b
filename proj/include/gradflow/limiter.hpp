#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "gradflow/dg_field.hpp"

namespace gradflow {

struct LimiterReport {
  int cells_modified = 0;
  // Smallest cell minimum before limiting; exact when below delta, otherwise
  // a lower bound for it.
  double worst_min_before = 0.0;
  double theta_min = 1.0;         // smallest scaling factor applied
  std::vector<int> cells_failed;  // cells whose average is below delta
};

/// How cells with an average below delta are treated.
enum class SubDeltaPolicy {
  /// Refuse: apply_limiter throws LimiterFailure.
  strict,
  /// Cells with 0 < average < delta are flattened to their average (the
  /// largest admissible scaling); averages <= 0 still throw.
  flatten,
};

class LimiterFailure : public std::runtime_error {
 public:
  LimiterFailure(const std::string& what, LimiterReport report)
      : std::runtime_error(what), report(std::move(report)) {}
  LimiterReport report;
};

struct LimiterResult {
  DGField field;
  LimiterReport report;
};

/// Minimum of a polynomial given by scaled-Legendre coefficients over
/// [-1, 1] (reference values, no 1/sqrt(h) factor).
double reference_polynomial_min(std::span<const double> coeffs);

/// Exact minimum of the cell polynomial over the closed cell.
double cell_min(const DGField& field, int cell);

/// Scales each cell about its mean so its minimum is at least delta.
LimiterResult apply_limiter(const DGField& field, double delta,
                            SubDeltaPolicy policy = SubDeltaPolicy::strict);

}  // namespace gradflow
