#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradflow/problem.hpp"

namespace gradflow {

/// Raised for malformed or inconsistent configuration; the message carries
/// the source name and line number when known.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A user-defined problem assembled from named ingredients.
struct CustomProblem {
  std::string h = "zero";        // zero | entropy | power (uses nu, m)
  std::string v = "zero";        // zero | quadratic | double_well
  std::string w = "zero";        // zero | attractive_repulsive | compact | gaussian
  std::string bc = "zero_flux";  // zero_flux | periodic
  double a = -1.0;
  double b = 1.0;
  // constant:<c> | gaussian:<center>:<sigma>:<amplitude> |
  // indicator:<lo>:<hi>:<value>
  std::string initial = "constant:1";
};

struct RunConfig {
  std::optional<int> example;
  std::optional<CustomProblem> custom;
  std::string variant;
  std::optional<double> nu;
  std::optional<double> m;
  // Unset values fall back to the problem's defaults.
  std::optional<int> n_cells;
  std::optional<int> degree;
  std::optional<double> t_final;
  SchemeParams params = default_params();
  std::vector<double> snapshot_times;
  std::string out_dir;
  std::uint64_t seed = 12345;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys, bad
/// numbers and duplicate keys raise ConfigError naming `source` and the line.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Applies one entry; shared by the file parser and command-line overrides.
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);

/// Throws ConfigError unless numeric fields are finite, N >= 2, k in
/// [0, kMaxDegree], t_final > 0 and exactly one problem source is set.
void validate_config(const RunConfig& config);

/// Catalog example or custom problem described by the config.
ProblemSpec build_problem(const RunConfig& config);

/// Scheme parameters with the resolved degree filled in.
SchemeParams resolved_params(const RunConfig& config, const ProblemSpec& problem);
int resolved_cells(const RunConfig& config, const ProblemSpec& problem);
double resolved_t_final(const RunConfig& config, const ProblemSpec& problem);

}  // namespace gradflow
