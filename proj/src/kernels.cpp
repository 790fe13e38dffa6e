#include "repairctl/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "repairctl/errors.hpp"

namespace repairctl {

void P0History::push(double s, double value) {
  if (!abscissae_.empty()) {
    if (!(s > abscissae_.back()))
      throw InvalidParameter("p0 history abscissae must increase");
    cumulative_.push_back(cumulative_.back() + 0.5 * (s - abscissae_.back()) * (value + values_.back()));
  } else {
    cumulative_.push_back(0.0);
  }
  abscissae_.push_back(s);
  values_.push_back(value);
}

void P0History::revise_latest(double value) {
  if (values_.empty())
    throw InvalidParameter("p0 history is empty");
  const std::size_t n = values_.size();
  values_.back() = value;
  if (n > 1)
    cumulative_.back() = cumulative_[n - 2] + 0.5 * (abscissae_[n - 1] - abscissae_[n - 2]) * (value + values_[n - 2]);
}

std::size_t P0History::segment(double s) const {
  const auto it = std::upper_bound(abscissae_.begin(), abscissae_.end(), s);
  const auto k = static_cast<std::size_t>(it - abscissae_.begin());
  return std::clamp<std::size_t>(k, 1, abscissae_.size() - 1) - 1;
}

double P0History::at(double s) const {
  if (values_.size() == 1 || s <= abscissae_.front())
    return values_.front();
  if (s >= abscissae_.back())
    return values_.back();
  const std::size_t k = segment(s);
  const double theta = (s - abscissae_[k]) / (abscissae_[k + 1] - abscissae_[k]);
  return (1.0 - theta) * values_[k] + theta * values_[k + 1];
}

double P0History::primitive(double s) const {
  if (values_.size() == 1)
    return 0.0;
  s = std::clamp(s, abscissae_.front(), abscissae_.back());
  const std::size_t k = segment(s);
  return cumulative_[k] + 0.5 * (s - abscissae_[k]) * (values_[k] + at(s));
}

double P0History::integral(double a, double b) const {
  if (b <= a)
    return 0.0;
  return primitive(b) - primitive(a);
}

namespace kernels {

double initial_ratio(const SpatialGrid &grid, std::span<const double> p1_initial,
                     std::span<const double> density, double psi) {
  const std::size_t k = grid.locate(psi);
  const double theta = std::clamp((psi - grid[k]) / grid.spacing(k), 0.0, 1.0);
  const double num = (1.0 - theta) * p1_initial[k] + theta * p1_initial[k + 1];
  const double den = (1.0 - theta) * density[k] + theta * density[k + 1];
  if (den > 0.0)
    return num / den;
  // psi sits on the endpoint where p1* = 0; fall back to the last node with p1* > 0
  for (std::size_t j = k + 1; j-- > 0;)
    if (density[j] > 0.0)
      return p1_initial[j] / density[j];
  return 0.0;
}

namespace {

inline double closed_loop_node(const ClosedLoopProfileArgs &a, std::size_t j) {
  const TravelMap &map = *a.map;
  const double density = map.node_density()[j];
  if (!(density > 0.0))
    return 0.0;
  const double y = map.node_times()[j];
  if (a.clock <= y) {
    const double psi = map.inverse(y - a.clock);
    return density * initial_ratio(map.grid(), a.p1_initial, map.node_density(), psi);
  }
  return density * a.gain * a.history->at(a.clock - y);
}

inline double open_loop_node(const OpenLoopProfileArgs &a, std::size_t j) {
  const SpatialGrid &grid = *a.grid;
  const double x = grid[j];
  const double s_x = a.survival_nodes[j];
  if (!(s_x > 0.0))
    return 0.0;
  const double tol = 1e-12 * grid.length();
  if (x < a.t - tol)
    return a.lambda * a.history->at(a.t - x) * s_x;
  const double u = std::max(x - a.t, 0.0);
  const double s_u = (*a.survival)(u);
  if (!(s_u > 0.0))
    return 0.0;
  return interpolate(grid, a.p1_initial, u) * s_x / s_u;
}

inline double upwind_cell(std::span<const double> in, double inflow, double courant,
                          std::span<const double> retention, std::size_t k) {
  const double left = k == 0 ? inflow : in[k - 1];
  const double v = in[k] - courant * (in[k] - left);
  return retention.empty() ? v : v * retention[k];
}

void check_sizes(std::size_t expected, std::size_t got) {
  if (expected != got)
    throw IncompatibleGrids("kernel output size mismatch");
}

} // namespace

namespace serial {

void closed_loop_profile(const ClosedLoopProfileArgs &args, std::span<double> out) {
  check_sizes(args.map->grid().size(), out.size());
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = closed_loop_node(args, j);
}

void open_loop_profile(const OpenLoopProfileArgs &args, std::span<double> out) {
  check_sizes(args.grid->size(), out.size());
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = open_loop_node(args, j);
}

void upwind_step(std::span<const double> in, double inflow, double courant,
                 std::span<const double> retention, std::span<double> out) {
  check_sizes(in.size(), out.size());
  for (std::size_t k = 0; k < in.size(); ++k)
    out[k] = upwind_cell(in, inflow, courant, retention, k);
}

} // namespace serial

namespace omp {

void closed_loop_profile(const ClosedLoopProfileArgs &args, std::span<double> out) {
  check_sizes(args.map->grid().size(), out.size());
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j)
    out[static_cast<std::size_t>(j)] = closed_loop_node(args, static_cast<std::size_t>(j));
}

void open_loop_profile(const OpenLoopProfileArgs &args, std::span<double> out) {
  check_sizes(args.grid->size(), out.size());
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j)
    out[static_cast<std::size_t>(j)] = open_loop_node(args, static_cast<std::size_t>(j));
}

void upwind_step(std::span<const double> in, double inflow, double courant,
                 std::span<const double> retention, std::span<double> out) {
  check_sizes(in.size(), out.size());
  const auto n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k)
    out[static_cast<std::size_t>(k)] =
        upwind_cell(in, inflow, courant, retention, static_cast<std::size_t>(k));
}

} // namespace omp

void closed_loop_profile(Exec exec, const ClosedLoopProfileArgs &args, std::span<double> out) {
  exec == Exec::parallel ? omp::closed_loop_profile(args, out) : serial::closed_loop_profile(args, out);
}

void open_loop_profile(Exec exec, const OpenLoopProfileArgs &args, std::span<double> out) {
  exec == Exec::parallel ? omp::open_loop_profile(args, out) : serial::open_loop_profile(args, out);
}

void upwind_step(Exec exec, std::span<const double> in, double inflow, double courant,
                 std::span<const double> retention, std::span<double> out) {
  exec == Exec::parallel ? omp::upwind_step(in, inflow, courant, retention, out)
                         : serial::upwind_step(in, inflow, courant, retention, out);
}

} // namespace kernels
} // namespace repairctl
