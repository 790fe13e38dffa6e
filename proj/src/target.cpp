#include "repairctl/target.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "repairctl/errors.hpp"

namespace repairctl {

const char *to_string(TargetForm form) {
  switch (form) {
  case TargetForm::linear_decay:
    return "linear-decay";
  case TargetForm::quadratic_decay:
    return "quadratic-decay";
  case TargetForm::tabulated:
    return "tabulated";
  }
  return "unknown";
}

namespace {

void require_positive(double lambda, double length) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw InvalidParameter("failure rate lambda must be positive");
  if (!(length > 0.0) || !std::isfinite(length))
    throw InvalidParameter("maximum repair time L must be positive");
}

} // namespace

TargetProfile make_linear_target(double lambda, double length) {
  require_positive(lambda, length);
  const double p0 = 1.0 / (1.0 + 0.5 * lambda * length);
  const double c = lambda * p0 / length;
  TargetProfile t;
  t.lambda = lambda;
  t.length = length;
  t.p0_star = p0;
  t.p1_star = [c, length](double x) { return c * (length - std::clamp(x, 0.0, length)); };
  t.dp1_star = [c](double) { return -c; };
  t.form = TargetForm::linear_decay;
  return t;
}

TargetProfile make_quadratic_target(double lambda, double length) {
  require_positive(lambda, length);
  const double p0 = 1.0 / (1.0 + lambda * length / 3.0);
  const double c = lambda * p0 / (length * length);
  TargetProfile t;
  t.lambda = lambda;
  t.length = length;
  t.p0_star = p0;
  t.p1_star = [c, length](double x) {
    const double r = length - std::clamp(x, 0.0, length);
    return c * r * r;
  };
  t.dp1_star = [c, length](double x) { return -2.0 * c * (length - std::clamp(x, 0.0, length)); };
  t.form = TargetForm::quadratic_decay;
  return t;
}

TargetProfile make_tabulated_target(double lambda, double p0_star, std::vector<double> xs,
                                    std::vector<double> values) {
  if (xs.size() != values.size())
    throw InvalidParameter("tabulated target: column lengths differ");
  if (xs.size() < 2)
    throw InvalidParameter("tabulated target needs at least two rows");
  if (xs.front() != 0.0)
    throw InvalidParameter("tabulated target must start at x = 0");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1]))
      throw InvalidParameter("tabulated target: x must be strictly ascending");
  require_positive(lambda, xs.back());

  struct Table {
    std::vector<double> x, v;
    std::size_t segment(double s) const {
      if (s <= x.front())
        return 0;
      if (s >= x.back())
        return x.size() - 2;
      auto it = std::upper_bound(x.begin(), x.end(), s);
      return static_cast<std::size_t>(it - x.begin()) - 1;
    }
    double slope(std::size_t k) const { return (v[k + 1] - v[k]) / (x[k + 1] - x[k]); }
  };
  auto table = std::make_shared<const Table>(Table{std::move(xs), std::move(values)});

  TargetProfile t;
  t.lambda = lambda;
  t.length = table->x.back();
  t.p0_star = p0_star;
  t.p1_star = [table](double s) {
    const std::size_t k = table->segment(s);
    const double theta = std::clamp((s - table->x[k]) / (table->x[k + 1] - table->x[k]), 0.0, 1.0);
    return (1.0 - theta) * table->v[k] + theta * table->v[k + 1];
  };
  // piecewise-constant derivative, right-continuous
  t.dp1_star = [table](double s) { return table->slope(table->segment(s)); };
  t.form = TargetForm::tabulated;
  t.knots = table->x;
  return t;
}

std::pair<std::vector<double>, std::vector<double>> read_two_column_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw InvalidParameter("cannot open table '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line))
    throw InvalidParameter("table '" + path.string() + "' is empty (header row required)");
  {
    // the header must not parse as data
    std::istringstream probe(line);
    double v = 0.0;
    if (probe >> v)
      throw InvalidParameter("table '" + path.string() + "' lacks a header row");
  }
  std::vector<double> xs, vs;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double x = 0.0, v = 0.0;
    std::string rest;
    if (!(fields >> x >> v) || (fields >> rest))
      throw InvalidParameter("table '" + path.string() + "' row " + std::to_string(row) +
                             ": expected two numeric columns");
    xs.push_back(x);
    vs.push_back(v);
  }
  return {std::move(xs), std::move(vs)};
}

TargetProfile load_tabulated_target(const std::filesystem::path &path, double lambda) {
  auto [xs, vs] = read_two_column_csv(path);
  if (xs.size() < 2)
    throw InvalidParameter("table '" + path.string() + "' needs at least two rows");
  double mass = 0.0;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k)
    mass += 0.5 * (xs[k + 1] - xs[k]) * (vs[k] + vs[k + 1]);
  auto t = make_tabulated_target(lambda, 1.0 - mass, std::move(xs), std::move(vs));
  t.table_path = path.string();
  return t;
}

std::vector<double> sample_p1(const TargetProfile &target, const SpatialGrid &grid) {
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j)
    out[j] = target.p1(grid[j]);
  return out;
}

SystemState target_state(const TargetProfile &target, const SpatialGrid &grid) {
  return SystemState{target.p0_star, sample_p1(target, grid), 0.0};
}

SystemState compatible_state(const TargetProfile &target, const SpatialGrid &grid, double p0) {
  if (!(p0 >= 0.0 && p0 <= 1.0))
    throw InvalidParameter("initial p0 must lie in [0, 1]");
  const auto star = sample_p1(target, grid);
  const auto f = cumulative_trapezoid(grid, star);
  std::vector<double> weighted(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    weighted[k] = star[k] * f[k];
  const double a = p0 / target.p0_star;
  const double b = (1.0 - p0 - a * trapezoid(grid, star)) / trapezoid(grid, weighted);

  SystemState s;
  s.p0 = p0;
  s.p1.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double r = a + b * f[k];
    if (r < 0.0)
      throw InvalidParameter("no nonnegative compatible datum for p0 = " + std::to_string(p0));
    s.p1[k] = star[k] * r;
  }
  return s;
}

double target_failure_mass(const TargetProfile &target, const SpatialGrid &grid) {
  return trapezoid(grid, sample_p1(target, grid));
}

double exact_failure_mass(const TargetProfile &target, const SpatialGrid &grid) {
  std::vector<double> breaks(grid.nodes().begin(), grid.nodes().end());
  breaks.insert(breaks.end(), target.knots.begin(), target.knots.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const double r = std::sqrt(0.6);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double mid = 0.5 * (breaks[k] + breaks[k + 1]);
    const double half = 0.5 * (breaks[k + 1] - breaks[k]);
    sum += half * (5.0 * target.p1(mid - r * half) + 8.0 * target.p1(mid) + 5.0 * target.p1(mid + r * half)) / 9.0;
  }
  return sum;
}

const ValidationCheck *ValidationReport::find(const std::string &name) const {
  for (const auto &c : checks)
    if (c.name == name)
      return &c;
  return nullptr;
}

ValidationReport validate_target(const TargetProfile &target, const SpatialGrid &grid, double tol) {
  const auto p = sample_p1(target, grid);
  const std::size_t n = grid.size();
  const double p_max = *std::max_element(p.begin(), p.end());
  const double eps_pos = 1e-12 * std::max(p_max, 0.0);

  ValidationReport report;
  auto add = [&report](const char *name, double residual, double tolerance, bool ok) {
    report.checks.push_back(ValidationCheck{name, residual, tolerance, ok});
  };

  const double boundary = std::abs(p.front() - target.lambda * target.p0_star);
  add(check_names::boundary, boundary, tol, boundary <= tol);

  const double endpoint = std::abs(p.back());
  add(check_names::endpoint, endpoint, tol, endpoint <= tol);

  // violation amounts: zero means the strict inequality holds with margin eps_pos
  double positivity = 0.0;
  double monotone = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    positivity = std::max(positivity, eps_pos - p[j]);
    monotone = std::max(monotone, target.dp1(grid[j]) + eps_pos);
  }
  for (std::size_t j = 0; j + 1 < n; ++j)
    monotone = std::max(monotone, p[j + 1] - p[j] + (j + 1 < n - 1 ? eps_pos : 0.0));
  positivity = std::max(positivity, 0.0);
  monotone = std::max(monotone, 0.0);
  add(check_names::positivity, positivity, eps_pos, positivity == 0.0);
  add(check_names::monotone, monotone, eps_pos, monotone == 0.0);

  const double mass = std::abs(target.p0_star + exact_failure_mass(target, grid) - 1.0);
  add(check_names::mass, mass, tol, mass <= tol);

  report.passed = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const ValidationCheck &c) { return c.passed; });
  return report;
}

} // namespace repairctl
