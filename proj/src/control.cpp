#include "repairctl/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "repairctl/errors.hpp"

namespace repairctl {

StaticPlan static_repair_rate(const TargetProfile &target, const SpatialGrid &grid) {
  for (std::size_t k = 1; k + 1 < grid.size(); ++k)
    if (!(target.p1(grid[k]) > 0.0))
      throw SingularTarget("target density vanishes at interior node x = " + format_number(grid[k]));
  const double head = target.p1(0.0);
  if (!(head > 0.0))
    throw SingularTarget("target density vanishes at x = 0");

  StaticPlan plan;
  plan.target = target;
  plan.hazard = [target](double x) {
    const double p = target.p1(x);
    if (!(p > 0.0))
      return std::numeric_limits<double>::infinity();
    return -target.dp1(x) / p;
  };
  plan.survival = [target, head](double x) { return std::clamp(target.p1(x) / head, 0.0, 1.0); };
  plan.repair_density = [target, head](double x) { return -target.dp1(x) / head; };
  return plan;
}

double select_alpha(const TargetProfile &target, double c0, double eps0) {
  if (!(eps0 > 0.0) || !std::isfinite(eps0))
    throw InvalidParameter("decay rate eps0 must be positive");
  if (!(c0 > 0.0))
    throw InvalidParameter("schedule constant c0 must be positive");
  return std::max({target.p1(0.0), 1.0 / c0, 1.0 / (c0 * eps0)});
}

std::vector<std::optional<double>> evaluate_feedback_mu(const SystemState &state,
                                                        std::span<const double> dp1_dx,
                                                        const StagedPlan &plan,
                                                        const SpatialGrid &grid, double t) {
  require_samples(grid, state.p1, "state");
  require_samples(grid, dp1_dx, "derivative");
  const double weight = plan.alpha * plan.schedule.stage_at(t);

  std::vector<std::optional<double>> mu(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double p = state.p1[k];
    const double star = plan.target.p1(grid[k]);
    if (!(p > 0.0) || !(star > 0.0))
      continue;
    const double g = 1.0 / star;
    const double dg = -plan.target.dp1(grid[k]) / (star * star);
    mu[k] = -dp1_dx[k] / p + weight * (dg * p + g * dp1_dx[k]) / p;
  }
  return mu;
}

namespace {

/// g p1 = p1 / p1* at the nodes; the endpoint where p1* = 0 is extrapolated linearly.
std::vector<double> weighted_density(const SystemState &s, const TargetProfile &target,
                                     const SpatialGrid &grid) {
  const std::size_t n = grid.size();
  std::vector<double> q(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double star = target.p1(grid[k]);
    q[k] = star > 0.0 ? s.p1[k] / star : std::numeric_limits<double>::quiet_NaN();
  }
  for (std::size_t k = n; k-- > 0;) {
    if (!std::isnan(q[k]))
      continue;
    if (k >= 2 && !std::isnan(q[k - 1]) && !std::isnan(q[k - 2])) {
      const double slope = (q[k - 1] - q[k - 2]) / grid.spacing(k - 2);
      q[k] = q[k - 1] + slope * grid.spacing(k - 1);
    } else {
      q[k] = 0.0;
    }
  }
  return q;
}

double state_error(const Trajectory &traj, double t) {
  const TrajectoryRecord *best = nullptr;
  for (const auto &r : traj.records)
    if (r.state.t <= t + 1e-12 && (!best || r.state.t >= best->state.t))
      best = &r;
  if (!best)
    return std::numeric_limits<double>::quiet_NaN();
  return x_norm_distance(best->state, traj.reference, traj.grid);
}

} // namespace

MuScan mu_boundedness_scan(const Trajectory &traj, const StagedPlan &plan, double l_frac,
                           const std::optional<DecayFit> &fit) {
  if (!(l_frac > 0.0 && l_frac < 1.0))
    throw InvalidParameter("l_frac must lie in (0, 1)");
  if (traj.stage_marks.empty())
    throw InvalidTrajectory("trajectory carries no stage markers");

  const SpatialGrid &grid = traj.grid;
  const double l = l_frac * grid.length();
  const double target_mass = target_failure_mass(plan.target, grid);
  const double gain = plan.target.lambda / plan.target.p1(0.0);

  MuScan scan;
  scan.l_frac = l_frac;
  scan.hypothesis_holds = plan.schedule.t_final() > 2.0 * target_mass;

  for (const auto &[stage, mark] : traj.stage_marks) {
    const double weight = plan.alpha * stage;
    MuScanRow row;
    row.stage = stage;
    row.t_start = mark.start;
    row.t_end = mark.end;
    const double tol = 1e-12 * std::max(1.0, mark.end);
    for (const auto &rec : traj.records) {
      if (rec.state.t < mark.start - tol || rec.state.t > mark.end + tol)
        continue;
      const auto q = weighted_density(rec.state, plan.target, grid);
      const auto dq = differentiate(grid, q);
      for (std::size_t k = 0; k < grid.size() && grid[k] <= l; ++k)
        row.sup = std::max(row.sup, std::abs(weight * dq[k]));
    }

    const double delayed = mark.start - 2.0 * target_mass / weight;
    row.bound_applicable = mark.start > 2.0 * target_mass && delayed >= 0.0;
    if (row.bound_applicable) {
      const double factor = 2.0 * plan.alpha * plan.alpha * stage * gain * gain;
      row.bound_observed = factor * state_error(traj, delayed);
      if (fit) {
        // envelope at the end of the last stage completed before `delayed`
        int k = 0;
        while (k < plan.schedule.i_max() && plan.schedule.end(k + 1) <= delayed)
          ++k;
        const double h = k == 0 ? 0.0 : harmonic_number(k);
        row.bound_fitted =
            factor * fit->M0 * std::exp(-plan.alpha * fit->eps0 * plan.schedule.c0() * h);
      }
    }
    scan.rows.push_back(row);
  }
  return scan;
}

void write_mu_scan_csv(const MuScan &scan, std::ostream &out) {
  out << "stage,t_start,t_end,sup,bound_applicable,bound_observed,bound_fitted\n";
  for (const auto &r : scan.rows)
    out << r.stage << ',' << format_number(r.t_start) << ',' << format_number(r.t_end) << ','
        << format_number(r.sup) << ',' << (r.bound_applicable ? 1 : 0) << ','
        << format_number(r.bound_observed) << ',' << format_number(r.bound_fitted) << '\n';
}

} // namespace repairctl
