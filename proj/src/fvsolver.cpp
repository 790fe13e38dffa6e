#include "repairctl/fvsolver.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "repairctl/charsolver.hpp"
#include "repairctl/errors.hpp"
#include "repairctl/travel_map.hpp"

namespace repairctl {

void validate(const FvConfig &cfg) {
  if (cfg.cells < 16)
    throw InvalidParameter("finite-volume grid needs at least 16 cells");
  if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0))
    throw InvalidParameter("cfl must lie in (0, 1]");
  if (!(cfg.t_end > 0.0))
    throw InvalidParameter("t_end must be positive");
}

namespace {

// 3-point Gauss-Legendre on [-1, 1]
constexpr std::array<double, 3> gauss_x{-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> gauss_w{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

template <class F> double cell_mean(F &&f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t q = 0; q < 3; ++q)
    s += gauss_w[q] * f(mid + half * gauss_x[q]);
  return 0.5 * s;
}

std::size_t fv_steps(double t_end, double cfl, double width) {
  return static_cast<std::size_t>(std::ceil(t_end / (cfl * width) - 1e-9));
}

} // namespace

Trajectory open_loop_fv(const SystemState &initial, const SpatialGrid &initial_grid,
                        const StaticPlan &plan, double lambda, const FvConfig &cfg, Exec exec) {
  validate(cfg);
  require_samples(initial_grid, initial.p1, "initial state");
  const double length = initial_grid.length();
  const std::size_t m = cfg.cells;
  const SpatialGrid grid = SpatialGrid::uniform(length, m);
  const double dx = length / static_cast<double>(m);
  const std::size_t steps = fv_steps(cfg.t_end, cfg.cfl, dx);
  const double dt = cfg.t_end / static_cast<double>(steps);
  const double courant = dt / dx;

  const auto cum = cumulative_trapezoid(initial_grid, initial.p1);
  std::vector<double> u(m), next(m), retention(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double a = grid[k], b = grid[k + 1];
    u[k] = (cumulative_integral(initial_grid, initial.p1, cum, b) -
            cumulative_integral(initial_grid, initial.p1, cum, a)) / dx;
    const double now = cell_mean(plan.survival, a, b);
    const double later = cell_mean([&](double x) { return plan.survival(std::min(x + dt, length)); }, a, b);
    retention[k] = now > 0.0 ? later / now : 0.0;
  }

  const auto to_nodes = [&](double p0, double t) {
    SystemState s;
    s.p0 = p0;
    s.t = t;
    s.p1.assign(m + 1, 0.0);
    s.p1[0] = lambda * p0;
    for (std::size_t k = 1; k < m; ++k)
      s.p1[k] = 0.5 * (u[k - 1] + u[k]);
    return s;
  };

  Trajectory traj{grid, steady_state(plan, lambda, grid), {}, {}};
  traj.push(to_nodes(initial.p0, initial.t), 0);

  double p0 = initial.p0;
  for (std::size_t n = 1; n <= steps; ++n) {
    kernels::upwind_step(exec, u, lambda * p0, courant, {}, next);
    // sink loss and outflow at L both return to the good mode
    double returned = dt * u[m - 1];
    for (std::size_t k = 0; k < m; ++k) {
      returned += dx * next[k] * (1.0 - retention[k]);
      next[k] *= retention[k];
    }
    p0 += -dt * lambda * p0 + returned;
    u.swap(next);
    traj.push(to_nodes(p0, initial.t + static_cast<double>(n) * dt), 0);
  }
  return traj;
}

Trajectory closed_loop_fv_transformed(const SystemState &initial, const SpatialGrid &grid,
                                      const TargetProfile &target, double alpha, int stage,
                                      const FvConfig &cfg, Exec exec) {
  validate(cfg);
  require_samples(grid, initial.p1, "initial state");
  const TravelMap map(target, alpha, stage, grid);
  const double horizon = map.horizon();
  const std::size_t m = cfg.cells;
  const double dy = horizon / static_cast<double>(m);
  const std::size_t steps = fv_steps(cfg.t_end, cfg.cfl, dy);
  const double dt = cfg.t_end / static_cast<double>(steps);
  const double courant = dt / dy;
  const double kappa = map.alpha_i() * target.lambda / target.p1(0.0);

  // cell mass of phi equals the p1 mass between the preimages of the cell edges
  const auto cum = cumulative_trapezoid(grid, initial.p1);
  std::vector<double> u(m), next(m);
  double lo = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double hi = cumulative_integral(grid, initial.p1, cum, map.inverse(static_cast<double>(k + 1) * dy));
    u[k] = (hi - lo) / dy;
    lo = hi;
  }

  const auto density = map.node_density();
  const auto times = map.node_times();
  const auto to_nodes = [&](double p0, double t) {
    SystemState s;
    s.p0 = p0;
    s.t = t;
    s.p1.assign(grid.size(), 0.0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double pos = times[j] / dy - 0.5; // in units of cell centres
      double phi;
      if (pos < 0.0) {
        const double theta = pos + 0.5; // between y = 0 and the first centre
        phi = (1.0 - 2.0 * theta) * kappa * p0 + 2.0 * theta * u[0];
      } else if (pos >= static_cast<double>(m - 1)) {
        phi = u[m - 1];
      } else {
        const auto c = static_cast<std::size_t>(pos);
        const double theta = pos - static_cast<double>(c);
        phi = (1.0 - theta) * u[c] + theta * u[c + 1];
      }
      s.p1[j] = phi * density[j] / map.alpha_i();
    }
    return s;
  };

  Trajectory traj{grid, target_state(target, grid), {}, {}};
  traj.push(to_nodes(initial.p0, initial.t), stage);
  traj.stage_marks[stage] = {initial.t, initial.t + cfg.t_end};

  double p0 = initial.p0;
  for (std::size_t n = 1; n <= steps; ++n) {
    kernels::upwind_step(exec, u, kappa * p0, courant, {}, next);
    p0 += dt * (u[m - 1] - kappa * p0);
    u.swap(next);
    traj.push(to_nodes(p0, initial.t + static_cast<double>(n) * dt), stage);
  }
  return traj;
}

} // namespace repairctl
