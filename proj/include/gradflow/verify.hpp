#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace gradflow {

struct PropertyResult {
  std::string module;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 12345;
  int limiter_cells = 10000;
  int stress_trials = 1000;
  /// Receives one line per property as it completes (may be null).
  std::ostream* log = nullptr;
};

/// Runs every module's property checks at small mesh sizes.
std::vector<PropertyResult> run_property_suite(const VerifyOptions& options = {});

/// Limiter properties over random cells of degrees 1..4 with random delta.
struct LimiterStats {
  int cells = 0;
  double max_mean_change = 0.0;  // |avg after - avg before| / |avg before|
  double min_excess = 0.0;       // min over cells of cell_min(after) - delta
  int idempotence_failures = 0;  // second pass modified or changed bits
};
LimiterStats limiter_property_stats(int n_cells, std::uint64_t seed);

/// Random limited densities, arbitrary steep energy fluxes, one corrected
/// Forward Euler step with the positivity CFL step size.
struct StressStats {
  int trials = 0;
  int positive = 0;  // trials where every new cell average is > 0
  double worst_ratio = 0.0;  // min over trials of min(new avg) / min(old avg)
};
StressStats positivity_stress_test(int trials, std::uint64_t seed);

}  // namespace gradflow
