#include "gradflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>

namespace gradflow {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& text, const std::filesystem::path& path,
                  int line) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw IoError(path.string() + ":" + std::to_string(line) +
                  ": not a number: '" + text + "'");
  }
  return v;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

// Reads a CSV file, checks its header, returns the data rows.
std::vector<std::vector<std::string>> read_rows(
    const std::filesystem::path& path, const std::string& header,
    size_t columns) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw IoError(path.string() + ": unexpected header");
  }
  std::vector<std::vector<std::string>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != columns) {
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": expected " + std::to_string(columns) + " columns");
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> linf_sample_points(int degree) {
  const int n = 2 * degree + 5;
  std::vector<double> pts{-1.0};
  for (int m = n - 1; m >= 0; --m) {
    pts.push_back(std::cos((2.0 * m + 1.0) * std::numbers::pi / (2.0 * n)));
  }
  pts.push_back(1.0);
  return pts;
}

ErrorNorms error_norms(const DGField& rho,
                       const std::function<double(double)>& reference) {
  const auto& mesh = rho.mesh();
  const auto g = gauss_legendre(rho.degree() + 3);
  const auto samples = linf_sample_points(rho.degree());
  ErrorNorms out;
  double sum = 0.0;
  for (int i = 0; i < mesh.n_cells; ++i) {
    double cell_sum = 0.0;
    for (int q = 0; q < g.size(); ++q) {
      const double d = rho.evaluate(i, g.nodes[q]) -
                       reference(mesh.to_physical(i, g.nodes[q]));
      cell_sum += g.weights[q] * d * d;
    }
    sum += 0.5 * mesh.h * cell_sum;
    for (double xi : samples) {
      const double d = rho.evaluate(i, xi) - reference(mesh.to_physical(i, xi));
      out.linf = std::max(out.linf, std::abs(d));
    }
  }
  out.l2 = std::sqrt(sum);
  return out;
}

double observed_order(double err_coarse, double err_fine, int n_coarse,
                      int n_fine) {
  return std::log(err_coarse / err_fine) /
         std::log(static_cast<double>(n_fine) / n_coarse);
}

void fill_orders(std::vector<ConvergenceRow>& rows) {
  for (size_t r = 0; r < rows.size(); ++r) {
    if (r == 0) {
      rows[r].l2_order.reset();
      rows[r].linf_order.reset();
      continue;
    }
    const auto& c = rows[r - 1];
    auto& f = rows[r];
    f.l2_order = observed_order(c.l2_error, f.l2_error, c.n_cells, f.n_cells);
    f.linf_order =
        observed_order(c.linf_error, f.linf_error, c.n_cells, f.n_cells);
  }
}

std::vector<ConvergenceRow> convergence_study(const ProblemSpec& problem,
                                              int degree,
                                              const std::vector<int>& n_list,
                                              double t_final,
                                              SchemeParams params) {
  if (!problem.exact_solution) {
    throw std::invalid_argument("convergence_study: problem '" + problem.name +
                                "' has no exact solution");
  }
  if (n_list.empty()) {
    throw std::invalid_argument("convergence_study: empty mesh list");
  }
  for (size_t r = 1; r < n_list.size(); ++r) {
    if (n_list[r] <= n_list[r - 1]) {
      throw std::invalid_argument(
          "convergence_study: mesh sizes must increase strictly");
    }
  }
  params.degree = degree;
  const auto& exact = *problem.exact_solution;
  std::vector<std::future<ConvergenceRow>> jobs;
  for (int n : n_list) {
    jobs.push_back(std::async(std::launch::async, [&problem, &exact, params, n,
                                                   t_final] {
      const Solver solver(problem, params, n);
      RunOptions options;
      options.t_final = t_final;
      const auto result = solver.run(options);
      const auto e = error_norms(result.final_field, [&](double x) {
        return exact(result.t, x);
      });
      ConvergenceRow row;
      row.n_cells = n;
      row.l2_error = e.l2;
      row.linf_error = e.linf;
      return row;
    }));
  }
  std::vector<ConvergenceRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  fill_orders(rows);
  return rows;
}

SteadyStateReport steady_state_report(const DGField& rho, const DGField& q,
                                      double support_threshold) {
  if (!rho.same_layout(q)) {
    throw std::invalid_argument("steady_state_report: rho and q differ in layout");
  }
  const auto samples = linf_sample_points(q.degree());
  SteadyStateReport out;
  int i = 0;
  const int n = rho.n_cells();
  while (i < n) {
    if (!(rho.cell_average(i) > support_threshold)) {
      ++i;
      continue;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (; i < n && rho.cell_average(i) > support_threshold; ++i) {
      for (double xi : samples) {
        const double v = q.evaluate(i, xi);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    ++out.support_components;
    out.q_variance = std::max(out.q_variance, hi - lo);
  }
  return out;
}

static const char* kTimeseriesHeader =
    "step,t,dt,energy,mass,min_cell_avg,min_point,limited_cells,"
    "used_correction";

void emit_timeseries(const std::filesystem::path& path,
                     const std::vector<DiagRecord>& records) {
  auto out = open_for_write(path);
  out << kTimeseriesHeader << '\n';
  for (const auto& r : records) {
    out << r.step << ',' << format_real(r.t) << ',' << format_real(r.dt) << ','
        << format_real(r.energy) << ',' << format_real(r.mass) << ','
        << format_real(r.min_cell_avg) << ',' << format_real(r.min_point)
        << ',' << r.limited_cells << ',' << (r.used_correction ? 1 : 0)
        << '\n';
  }
  check_written(out, path);
}

std::vector<DiagRecord> read_timeseries(const std::filesystem::path& path) {
  std::vector<DiagRecord> out;
  int line = 1;
  for (const auto& c : read_rows(path, kTimeseriesHeader, 9)) {
    ++line;
    DiagRecord r;
    r.step = static_cast<int>(parse_real(c[0], path, line));
    r.t = parse_real(c[1], path, line);
    r.dt = parse_real(c[2], path, line);
    r.energy = parse_real(c[3], path, line);
    r.mass = parse_real(c[4], path, line);
    r.min_cell_avg = parse_real(c[5], path, line);
    r.min_point = parse_real(c[6], path, line);
    r.limited_cells = static_cast<int>(parse_real(c[7], path, line));
    r.used_correction = parse_real(c[8], path, line) != 0.0;
    out.push_back(r);
  }
  return out;
}

void emit_snapshot(const std::filesystem::path& path, const DGField& rho,
                   const DGField& q, const Basis& basis) {
  if (!rho.same_layout(q) || rho.degree() != basis.degree()) {
    throw std::invalid_argument("emit_snapshot: layout mismatch");
  }
  auto out = open_for_write(path);
  out << "cell,x,rho,q\n";
  const auto& lob = basis.lobatto();
  for (int i = 0; i < rho.n_cells(); ++i) {
    for (int m = 0; m < lob.size(); ++m) {
      const double xi = lob.nodes[m];
      out << i << ',' << format_real(rho.mesh().to_physical(i, xi)) << ','
          << format_real(rho.evaluate(i, xi)) << ','
          << format_real(q.evaluate(i, xi)) << '\n';
    }
  }
  check_written(out, path);
}

std::string snapshot_filename(double t) {
  char buf[40];
  for (int digits = 1; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, t);
    if (std::strtod(buf, nullptr) == t) break;
  }
  return std::string("snapshot_t") + buf + ".csv";
}

static const char* kConvergenceHeader = "N,L2_error,L2_order,Linf_error,Linf_order";

void emit_convergence(const std::filesystem::path& path,
                      const std::vector<ConvergenceRow>& rows) {
  auto out = open_for_write(path);
  out << kConvergenceHeader << '\n';
  auto opt = [](const std::optional<double>& v) {
    return v ? format_real(*v) : std::string();
  };
  for (const auto& r : rows) {
    out << r.n_cells << ',' << format_real(r.l2_error) << ',' << opt(r.l2_order)
        << ',' << format_real(r.linf_error) << ',' << opt(r.linf_order) << '\n';
  }
  check_written(out, path);
}

std::vector<ConvergenceRow> read_convergence(const std::filesystem::path& path) {
  std::vector<ConvergenceRow> out;
  int line = 1;
  auto opt = [&](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return parse_real(s, path, line);
  };
  for (const auto& c : read_rows(path, kConvergenceHeader, 5)) {
    ++line;
    ConvergenceRow r;
    r.n_cells = static_cast<int>(parse_real(c[0], path, line));
    r.l2_error = parse_real(c[1], path, line);
    r.l2_order = opt(c[2]);
    r.linf_error = parse_real(c[3], path, line);
    r.linf_order = opt(c[4]);
    out.push_back(r);
  }
  return out;
}

}  // namespace gradflow
