#include "repairctl/state.hpp"

#include <cmath>

#include "repairctl/errors.hpp"

namespace repairctl {

double total_mass(const SystemState &s, const SpatialGrid &grid) { return s.p0 + trapezoid(grid, s.p1); }

double x_norm_distance(const SystemState &a, const SystemState &b, const SpatialGrid &grid) {
  require_samples(grid, a.p1, "x_norm_distance");
  require_samples(grid, b.p1, "x_norm_distance");
  const auto w = grid.weights();
  double sum = std::abs(a.p0 - b.p0);
  for (std::size_t j = 0; j < a.p1.size(); ++j)
    sum += w[j] * std::abs(a.p1[j] - b.p1[j]);
  return sum;
}

SystemState point_mass_good(const SpatialGrid &grid) {
  return SystemState{1.0, std::vector<double>(grid.size(), 0.0), 0.0};
}

SystemState uniform_failure(const SpatialGrid &grid) {
  return SystemState{0.0, std::vector<double>(grid.size(), 1.0 / grid.length()), 0.0};
}

} // namespace repairctl
