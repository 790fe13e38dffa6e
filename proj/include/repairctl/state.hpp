#pragma once

#include <vector>

#include "repairctl/grid.hpp"

namespace repairctl {

/// Probability state: good-mode probability p0 and failure-mode density p1 at grid nodes.
struct SystemState {
  double p0 = 0.0;
  std::vector<double> p1;
  double t = 0.0;
};

/// p0 + trapezoid of p1 over [0, L].
double total_mass(const SystemState &s, const SpatialGrid &grid);

/// |a.p0 - b.p0| + integral of |a.p1 - b.p1| (the X-norm of the difference).
double x_norm_distance(const SystemState &a, const SystemState &b, const SpatialGrid &grid);

/// All mass in the good mode: p0 = 1, p1 = 0.
SystemState point_mass_good(const SpatialGrid &grid);

/// All mass in the failure mode, spread uniformly over [0, L].
SystemState uniform_failure(const SpatialGrid &grid);

} // namespace repairctl
