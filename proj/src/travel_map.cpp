#include "repairctl/travel_map.hpp"

#include <algorithm>
#include <cmath>

#include "repairctl/errors.hpp"

namespace repairctl {

TravelMap::TravelMap(const TargetProfile &target, double alpha, int stage, const SpatialGrid &grid)
    : grid_(grid), alpha_i_(alpha * stage), density_(sample_p1(target, grid)) {
  if (!(alpha > 0.0))
    throw InvalidParameter("alpha must be positive");
  if (stage < 1)
    throw InvalidParameter("stage index must be at least 1");
  node_times_ = cumulative_trapezoid(grid_, density_);
  for (double &v : node_times_)
    v /= alpha_i_;
}

double TravelMap::forward(double x) const {
  const std::size_t k = grid_.locate(x);
  const double s = std::clamp(x - grid_[k], 0.0, grid_.spacing(k));
  // nodes map to the stored sums exactly; near a vanishing density the inverse is ill-conditioned
  if (s == grid_.spacing(k))
    return node_times_[k + 1];
  const double slope = (density_[k + 1] - density_[k]) / grid_.spacing(k);
  return node_times_[k] + s * (density_[k] + 0.5 * slope * s) / alpha_i_;
}

double TravelMap::inverse(double tau) const {
  if (tau <= 0.0)
    return 0.0;
  if (tau >= horizon())
    return grid_.length();
  auto it = std::upper_bound(node_times_.begin(), node_times_.end(), tau);
  const std::size_t k = static_cast<std::size_t>(it - node_times_.begin()) - 1;
  const double h = grid_.spacing(k);
  // solve a s + b s^2 / 2 = delta inside cell k, a = p*_k, b = slope
  const double delta = (tau - node_times_[k]) * alpha_i_;
  const double a = density_[k];
  const double b = (density_[k + 1] - density_[k]) / h;
  const double disc = std::max(a * a + 2.0 * b * delta, 0.0);
  const double denom = a + std::sqrt(disc);
  double s = denom > 0.0 ? 2.0 * delta / denom : h;
  s = std::clamp(s, 0.0, h);
  // one Newton polish on the cell polynomial
  const double f = a * s + 0.5 * b * s * s - delta;
  const double df = a + b * s;
  if (df > 0.0)
    s = std::clamp(s - f / df, 0.0, h);
  return grid_[k] + s;
}

TravelMap build_travel_map(const TargetProfile &target, double alpha, int stage, const SpatialGrid &grid) {
  return TravelMap(target, alpha, stage, grid);
}

} // namespace repairctl
