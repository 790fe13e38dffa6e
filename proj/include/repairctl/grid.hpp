#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace repairctl {

/// Repair-time samples 0 = x_0 < x_1 < ... < x_N = L.
class SpatialGrid {
public:
  static constexpr std::size_t min_cells = 8;

  static SpatialGrid uniform(double length, std::size_t cells);
  static SpatialGrid from_nodes(std::vector<double> nodes);

  double length() const { return nodes_.back(); }
  std::size_t cells() const { return nodes_.size() - 1; }
  std::size_t size() const { return nodes_.size(); }
  std::span<const double> nodes() const { return nodes_; }
  double operator[](std::size_t i) const { return nodes_[i]; }

  double spacing(std::size_t cell) const { return nodes_[cell + 1] - nodes_[cell]; }
  double min_spacing() const;
  bool is_uniform(double rel_tol = 1e-12) const;

  /// Composite trapezoid weights, one per node.
  std::span<const double> weights() const { return weights_; }

  /// Cell index k with x in [x_k, x_{k+1}]; x is clamped to [0, L].
  std::size_t locate(double x) const;

  bool operator==(const SpatialGrid &other) const { return nodes_ == other.nodes_; }

private:
  explicit SpatialGrid(std::vector<double> nodes);

  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Composite trapezoid of nodal samples.
double trapezoid(const SpatialGrid &grid, std::span<const double> values);

/// Piecewise-linear interpolant of nodal samples, clamped outside [0, L].
double interpolate(const SpatialGrid &grid, std::span<const double> values, double x);

/// Integral over [0, x] of the piecewise-linear interpolant.
double cumulative_integral(const SpatialGrid &grid, std::span<const double> values,
                           std::span<const double> cumulative, double x);

/// Node-wise running trapezoid sums, cumulative[0] = 0.
std::vector<double> cumulative_trapezoid(const SpatialGrid &grid, std::span<const double> values);

/// Central differences at interior nodes, second-order one-sided at the ends.
std::vector<double> differentiate(const SpatialGrid &grid, std::span<const double> values);

void require_samples(const SpatialGrid &grid, std::span<const double> values, const char *what);

} // namespace repairctl
