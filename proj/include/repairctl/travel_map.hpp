#pragma once

#include <span>
#include <vector>

#include "repairctl/grid.hpp"
#include "repairctl/target.hpp"

namespace repairctl {

/// Characteristic travel time tau(x) = (1 / (alpha i)) * integral_0^x p1*(s) ds.
///
/// The integral is taken over the piecewise-linear interpolant of p1* at the grid
/// nodes (cumulative trapezoid at nodes, exact quadratic inside each cell), so the
/// map and its inverse are exact for linear-decay targets.
class TravelMap {
public:
  TravelMap(const TargetProfile &target, double alpha, int stage, const SpatialGrid &grid);

  double alpha_i() const { return alpha_i_; }
  double horizon() const { return node_times_.back(); }
  double forward(double x) const;
  /// x with forward(x) = tau; tau is clamped to [0, horizon].
  double inverse(double tau) const;

  /// forward() at each grid node.
  std::span<const double> node_times() const { return node_times_; }
  /// p1* sampled at the grid nodes.
  std::span<const double> node_density() const { return density_; }
  const SpatialGrid &grid() const { return grid_; }

private:
  SpatialGrid grid_;
  double alpha_i_;
  std::vector<double> density_;
  std::vector<double> node_times_;
};

TravelMap build_travel_map(const TargetProfile &target, double alpha, int stage, const SpatialGrid &grid);

} // namespace repairctl
