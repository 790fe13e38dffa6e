#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "repairctl/grid.hpp"
#include "repairctl/state.hpp"

namespace repairctl {

struct StepDiagnostics {
  double mass = 0.0;
  double min_p1 = 0.0;
  double dist_to_target = 0.0;
};

struct TrajectoryRecord {
  SystemState state;
  int stage = 0; // 0 for open-loop runs
  StepDiagnostics diag;
};

struct StageMark {
  double start = 0.0;
  double end = 0.0;
};

/// Time-ordered solver output. `reference` is the state distances are measured against
/// (the target for closed-loop runs, the steady state for open-loop runs).
struct Trajectory {
  SpatialGrid grid;
  SystemState reference;
  std::vector<TrajectoryRecord> records;
  std::map<int, StageMark> stage_marks;

  /// Appends a record and fills its diagnostics against `reference`.
  void push(SystemState state, int stage);

  const TrajectoryRecord &back() const { return records.back(); }
  bool empty() const { return records.empty(); }

  /// Last record whose time is within `tol` of t, or nullptr.
  const TrajectoryRecord *at_time(double t, double tol = 1e-12) const;
};

StepDiagnostics diagnose(const SystemState &state, const SystemState &reference, const SpatialGrid &grid);

/// Columns: t, stage, p0, mass, min_p1, dist_to_target.
void write_trajectory_csv(const Trajectory &traj, std::ostream &out);

/// One row per requested time (nearest record), one column per node.
void write_snapshot_csv(const Trajectory &traj, std::span<const double> times, std::ostream &out);

/// Full round-trip precision, scientific notation.
std::string format_number(double v);

} // namespace repairctl
