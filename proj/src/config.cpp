#include "gradflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "gradflow/basis.hpp"

namespace gradflow {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) parts.push_back(trim(part));
  return parts;
}

double to_real(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ConfigError("'" + key + "': not a number: '" + text + "'");
  }
  if (!std::isfinite(v)) {
    throw ConfigError("'" + key + "': value must be finite");
  }
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ConfigError("'" + key + "': not an integer: '" + text + "'");
  }
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const long long v = to_integer(key, text);
  if (v < -1000000000LL || v > 1000000000LL) {
    throw ConfigError("'" + key + "': integer out of range");
  }
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("'" + key + "': not a boolean: '" + text + "'");
}

CustomProblem& custom(RunConfig& c) {
  if (!c.custom) c.custom.emplace();
  return *c.custom;
}

void require_choice(const std::string& key, const std::string& value,
                    std::initializer_list<const char*> choices) {
  for (const char* c : choices) {
    if (value == c) return;
  }
  std::string list;
  for (const char* c : choices) list += std::string(list.empty() ? "" : ", ") + c;
  throw ConfigError("'" + key + "': expected one of " + list + ", got '" +
                    value + "'");
}

ScalarFn initial_shape(const std::string& spec) {
  const auto parts = split(spec, ':');
  const std::string key = "initial";
  if (parts.empty()) throw ConfigError("'initial': empty shape");
  auto arg = [&](size_t i) { return to_real(key, parts.at(i)); };
  if (parts[0] == "constant" && parts.size() == 2) {
    const double c = arg(1);
    return [c](double) { return c; };
  }
  if (parts[0] == "gaussian" && parts.size() == 4) {
    const double center = arg(1), sigma = arg(2), amplitude = arg(3);
    if (!(sigma > 0.0)) throw ConfigError("'initial': sigma must be positive");
    return [=](double x) {
      const double z = (x - center) / sigma;
      return amplitude * std::exp(-0.5 * z * z);
    };
  }
  if (parts[0] == "indicator" && parts.size() == 4) {
    const double lo = arg(1), hi = arg(2), value = arg(3);
    return [=](double x) { return x >= lo && x <= hi ? value : 0.0; };
  }
  throw ConfigError("'initial': unrecognized shape '" + spec + "'");
}

}  // namespace

void apply_config_entry(RunConfig& c, const std::string& key,
                        const std::string& value) {
  auto& p = c.params;
  if (key == "example") {
    c.example = to_int(key, value);
  } else if (key == "variant") {
    c.variant = value;
  } else if (key == "nu") {
    c.nu = to_real(key, value);
  } else if (key == "m") {
    c.m = to_real(key, value);
  } else if (key == "N") {
    c.n_cells = to_int(key, value);
  } else if (key == "k") {
    c.degree = to_int(key, value);
  } else if (key == "t_final") {
    c.t_final = to_real(key, value);
  } else if (key == "beta0") {
    p.beta0 = to_real(key, value);
  } else if (key == "beta1") {
    p.beta1 = to_real(key, value);
  } else if (key == "delta") {
    p.delta = to_real(key, value);
  } else if (key == "safety") {
    p.safety = to_real(key, value);
  } else if (key == "cap_coef") {
    p.cap_coef = to_real(key, value);
  } else if (key == "diffusive_safety") {
    p.diffusive_safety = to_real(key, value);
  } else if (key == "fixed_dt") {
    p.fixed_dt = to_real(key, value);
  } else if (key == "gauss_points") {
    p.gauss_points = to_int(key, value);
  } else if (key == "lobatto_points") {
    p.lobatto_points = to_int(key, value);
  } else if (key == "energy_retry_limit") {
    p.energy_retry_limit = to_int(key, value);
  } else if (key == "integrator") {
    require_choice(key, value, {"euler", "rk3"});
    p.integrator = value == "euler" ? Integrator::euler : Integrator::rk3;
  } else if (key == "strict_energy") {
    p.strict_energy = to_bool(key, value);
  } else if (key == "snapshot_times") {
    c.snapshot_times.clear();
    for (const auto& t : split(value, ',')) {
      if (!t.empty()) c.snapshot_times.push_back(to_real(key, t));
    }
  } else if (key == "out") {
    c.out_dir = value;
  } else if (key == "seed") {
    const long long s = to_integer(key, value);
    if (s < 0) throw ConfigError("'seed': must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "H") {
    require_choice(key, value, {"zero", "entropy", "power"});
    custom(c).h = value;
  } else if (key == "V") {
    require_choice(key, value, {"zero", "quadratic", "double_well"});
    custom(c).v = value;
  } else if (key == "W") {
    require_choice(key, value,
                   {"zero", "attractive_repulsive", "compact", "gaussian"});
    custom(c).w = value;
  } else if (key == "bc") {
    require_choice(key, value, {"zero_flux", "periodic"});
    custom(c).bc = value;
  } else if (key == "a") {
    custom(c).a = to_real(key, value);
  } else if (key == "b") {
    custom(c).b = to_real(key, value);
  } else if (key == "initial") {
    initial_shape(value);  // validates eagerly
    custom(c).initial = value;
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig config;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (!seen.insert(key).second) {
      throw ConfigError(where + "duplicate key '" + key + "'");
    }
    try {
      apply_config_entry(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.string());
}

void validate_config(const RunConfig& c) {
  if (c.example.has_value() == c.custom.has_value()) {
    throw ConfigError(
        "config must set either 'example' or a custom problem (H, V, W, ...)");
  }
  if (c.custom && (!c.variant.empty())) {
    throw ConfigError("'variant' only applies to catalog examples");
  }
  if (c.n_cells && *c.n_cells < 2) throw ConfigError("'N' must be >= 2");
  if (c.degree && (*c.degree < 0 || *c.degree > kMaxDegree)) {
    throw ConfigError("'k' must lie in [0, " + std::to_string(kMaxDegree) + "]");
  }
  if (c.t_final && !(*c.t_final > 0.0)) {
    throw ConfigError("'t_final' must be positive");
  }
  const auto& p = c.params;
  for (double v : {p.beta0, p.beta1, p.delta, p.safety, p.cap_coef,
                   p.diffusive_safety, p.fixed_dt}) {
    if (!std::isfinite(v)) throw ConfigError("scheme parameters must be finite");
  }
  if (p.delta < 0.0) throw ConfigError("'delta' must be nonnegative");
  if (!(p.safety > 0.0) || !(p.cap_coef > 0.0) || !(p.diffusive_safety > 0.0)) {
    throw ConfigError("'safety', 'cap_coef', 'diffusive_safety' must be positive");
  }
  if (p.fixed_dt < 0.0) throw ConfigError("'fixed_dt' must be nonnegative");
  for (double t : c.snapshot_times) {
    if (t < 0.0) throw ConfigError("snapshot times must be nonnegative");
  }
  if (c.custom && !(c.custom->b > c.custom->a)) {
    throw ConfigError("custom problem needs b > a");
  }
}

ProblemSpec build_problem(const RunConfig& c) {
  validate_config(c);
  if (c.example) {
    ExampleOptions options;
    options.variant = c.variant;
    options.nu = c.nu;
    options.m = c.m;
    return example(*c.example, options);
  }
  const auto& cp = *c.custom;
  InternalEnergy h = InternalEnergy::zero();
  if (cp.h == "entropy") h = InternalEnergy::entropy();
  if (cp.h == "power") {
    if (!c.nu || !c.m) throw ConfigError("H = power needs 'nu' and 'm'");
    h = InternalEnergy::power(*c.nu, *c.m);
  }
  ConfinementPotential v = ConfinementPotential::zero();
  if (cp.v == "quadratic") v = ConfinementPotential::quadratic();
  if (cp.v == "double_well") v = ConfinementPotential::double_well();
  InteractionKernel w = InteractionKernel::zero();
  if (cp.w == "attractive_repulsive") w = InteractionKernel::attractive_repulsive();
  if (cp.w == "compact") w = InteractionKernel::compact_tent();
  if (cp.w == "gaussian") w = InteractionKernel::gaussian();
  const BoundaryKind bc =
      cp.bc == "periodic" ? BoundaryKind::periodic : BoundaryKind::zero_flux;
  return make_problem(std::move(h), std::move(v), std::move(w), cp.a, cp.b, bc,
                      initial_shape(cp.initial));
}

SchemeParams resolved_params(const RunConfig& c, const ProblemSpec& problem) {
  SchemeParams p = c.params;
  p.degree = c.degree.value_or(problem.default_degree);
  return p;
}

int resolved_cells(const RunConfig& c, const ProblemSpec& problem) {
  return c.n_cells.value_or(problem.default_n_cells);
}

double resolved_t_final(const RunConfig& c, const ProblemSpec& problem) {
  return c.t_final.value_or(problem.default_t_final);
}

}  // namespace gradflow
