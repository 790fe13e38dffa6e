#include "repairctl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "repairctl/errors.hpp"

namespace repairctl {

SpatialGrid::SpatialGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < min_cells + 1)
    throw InvalidParameter("grid needs at least " + std::to_string(min_cells) + " cells");
  if (nodes_.front() != 0.0)
    throw InvalidParameter("grid must start at x = 0");
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (!(nodes_[i] > nodes_[i - 1]))
      throw InvalidParameter("grid nodes must be strictly increasing");
  if (!std::isfinite(nodes_.back()))
    throw InvalidParameter("grid length must be finite");

  weights_.assign(nodes_.size(), 0.0);
  for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
    const double h = nodes_[k + 1] - nodes_[k];
    weights_[k] += 0.5 * h;
    weights_[k + 1] += 0.5 * h;
  }
}

SpatialGrid SpatialGrid::uniform(double length, std::size_t cells) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw InvalidParameter("grid length must be positive and finite");
  std::vector<double> nodes(cells + 1);
  for (std::size_t j = 0; j <= cells; ++j)
    nodes[j] = length * static_cast<double>(j) / static_cast<double>(cells);
  nodes.back() = length;
  return SpatialGrid(std::move(nodes));
}

SpatialGrid SpatialGrid::from_nodes(std::vector<double> nodes) { return SpatialGrid(std::move(nodes)); }

double SpatialGrid::min_spacing() const {
  double h = spacing(0);
  for (std::size_t k = 1; k < cells(); ++k)
    h = std::min(h, spacing(k));
  return h;
}

bool SpatialGrid::is_uniform(double rel_tol) const {
  const double h = length() / static_cast<double>(cells());
  for (std::size_t k = 0; k < cells(); ++k)
    if (std::abs(spacing(k) - h) > rel_tol * h)
      return false;
  return true;
}

std::size_t SpatialGrid::locate(double x) const {
  if (x <= nodes_.front())
    return 0;
  if (x >= nodes_.back())
    return cells() - 1;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

void require_samples(const SpatialGrid &grid, std::span<const double> values, const char *what) {
  if (values.size() != grid.size())
    throw IncompatibleGrids(std::string(what) + ": expected " + std::to_string(grid.size()) +
                            " samples, got " + std::to_string(values.size()));
}

double trapezoid(const SpatialGrid &grid, std::span<const double> values) {
  require_samples(grid, values, "trapezoid");
  const auto w = grid.weights();
  double sum = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j)
    sum += w[j] * values[j];
  return sum;
}

double interpolate(const SpatialGrid &grid, std::span<const double> values, double x) {
  const std::size_t k = grid.locate(x);
  const double x0 = grid[k];
  const double h = grid.spacing(k);
  const double theta = std::clamp((x - x0) / h, 0.0, 1.0);
  return (1.0 - theta) * values[k] + theta * values[k + 1];
}

std::vector<double> cumulative_trapezoid(const SpatialGrid &grid, std::span<const double> values) {
  require_samples(grid, values, "cumulative_trapezoid");
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t k = 0; k + 1 < values.size(); ++k)
    out[k + 1] = out[k] + 0.5 * grid.spacing(k) * (values[k] + values[k + 1]);
  return out;
}

double cumulative_integral(const SpatialGrid &grid, std::span<const double> values,
                           std::span<const double> cumulative, double x) {
  const std::size_t k = grid.locate(x);
  const double s = std::clamp(x - grid[k], 0.0, grid.spacing(k));
  const double slope = (values[k + 1] - values[k]) / grid.spacing(k);
  return cumulative[k] + s * (values[k] + 0.5 * slope * s);
}

std::vector<double> differentiate(const SpatialGrid &grid, std::span<const double> values) {
  require_samples(grid, values, "differentiate");
  const std::size_t n = values.size();
  std::vector<double> d(n, 0.0);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double hl = grid.spacing(j - 1);
    const double hr = grid.spacing(j);
    // second-order on nonuniform grids
    d[j] = (hl * hl * values[j + 1] - hr * hr * values[j - 1] + (hr * hr - hl * hl) * values[j]) /
           (hl * hr * (hl + hr));
  }
  {
    const double h1 = grid.spacing(0);
    const double h2 = grid.spacing(1);
    d[0] = (-(2.0 * h1 + h2) / (h1 * (h1 + h2))) * values[0] + ((h1 + h2) / (h1 * h2)) * values[1] -
           (h1 / (h2 * (h1 + h2))) * values[2];
  }
  {
    const double h1 = grid.spacing(n - 2);
    const double h2 = grid.spacing(n - 3);
    d[n - 1] = ((2.0 * h1 + h2) / (h1 * (h1 + h2))) * values[n - 1] -
               ((h1 + h2) / (h1 * h2)) * values[n - 2] + (h1 / (h2 * (h1 + h2))) * values[n - 3];
  }
  return d;
}

} // namespace repairctl
