#include "repairctl/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace repairctl {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

StepDiagnostics diagnose(const SystemState &state, const SystemState &reference, const SpatialGrid &grid) {
  StepDiagnostics d;
  d.mass = total_mass(state, grid);
  d.min_p1 = state.p1.empty() ? 0.0 : *std::min_element(state.p1.begin(), state.p1.end());
  d.dist_to_target = x_norm_distance(state, reference, grid);
  return d;
}

void Trajectory::push(SystemState state, int stage) {
  TrajectoryRecord rec;
  rec.diag = diagnose(state, reference, grid);
  rec.stage = stage;
  rec.state = std::move(state);
  records.push_back(std::move(rec));
}

const TrajectoryRecord *Trajectory::at_time(double t, double tol) const {
  for (auto it = records.rbegin(); it != records.rend(); ++it)
    if (std::abs(it->state.t - t) <= tol)
      return &*it;
  return nullptr;
}

void write_trajectory_csv(const Trajectory &traj, std::ostream &out) {
  out << "t,stage,p0,mass,min_p1,dist_to_target\n";
  for (const auto &r : traj.records) {
    out << format_number(r.state.t) << ',' << r.stage << ',' << format_number(r.state.p0) << ','
        << format_number(r.diag.mass) << ',' << format_number(r.diag.min_p1) << ','
        << format_number(r.diag.dist_to_target) << '\n';
  }
}

void write_snapshot_csv(const Trajectory &traj, std::span<const double> times, std::ostream &out) {
  out << "t,p0";
  for (double x : traj.grid.nodes())
    out << ",x=" << format_number(x);
  out << '\n';
  for (double t : times) {
    const TrajectoryRecord *best = nullptr;
    double gap = std::numeric_limits<double>::infinity();
    for (const auto &r : traj.records) {
      const double g = std::abs(r.state.t - t);
      if (g < gap) {
        gap = g;
        best = &r;
      }
    }
    if (!best)
      continue;
    out << format_number(best->state.t) << ',' << format_number(best->state.p0);
    for (double v : best->state.p1)
      out << ',' << format_number(v);
    out << '\n';
  }
}

} // namespace repairctl
