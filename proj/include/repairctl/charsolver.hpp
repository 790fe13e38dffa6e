#pragma once

#include "repairctl/control.hpp"
#include "repairctl/grid.hpp"
#include "repairctl/kernels.hpp"
#include "repairctl/state.hpp"
#include "repairctl/target.hpp"
#include "repairctl/trajectory.hpp"

namespace repairctl {

/// Steady state of the open loop under a static plan: p1 = lambda p0 S(x),
/// p0 = 1 / (1 + lambda * trapezoid(S)).
SystemState steady_state(const StaticPlan &plan, double lambda, const SpatialGrid &grid);

/// Exact characteristic solution of the open-loop model.
///
/// p1 is evaluated in closed form from the initial datum and the p0 history.
/// p1 at the new time is affine in the new p0 (only nodes within dt of the inflow read
/// it through the history interpolant), so p0 is solved from the trapezoid mass balance
/// and the initial mass is kept to rounding on any grid.
///
/// Requires dt <= min cell width (StepSizeError otherwise) and dt dividing t_end.
Trajectory open_loop_solve(const SystemState &initial, const StaticPlan &plan, double lambda,
                           double t_end, double dt, const SpatialGrid &grid,
                           Exec exec = Exec::parallel);

/// One stage of the closed loop with constant weight alpha * stage, on a local clock.
///
/// The returned records carry absolute times initial.t + local time. dt is reduced
/// so that it divides `duration`; dt > horizon / 4 throws DelayResolutionError.
Trajectory closed_loop_stage_solve(const SystemState &initial, const TargetProfile &target,
                                   double alpha, int stage, double duration, double dt,
                                   const SpatialGrid &grid, Exec exec = Exec::parallel);

struct DtPolicy {
  int steps_per_stage = 64;
  double horizon_divisor = 8.0;
  double min_dt = 1e-9; // stages needing a smaller step end the run
};

/// Time step used for stage `stage` of a staged run.
double stage_time_step(const DtPolicy &policy, double stage_length, double horizon);

enum class StopReason { tolerance_reached, i_max_reached, schedule_exhausted };

const char *to_string(StopReason reason);

struct StagedResult {
  Trajectory trajectory;
  StagedPlan plan;
  std::vector<double> stage_end_errors; // index i-1 holds stage i
  int stages_run = 0;
  StopReason reason = StopReason::i_max_reached;
  double final_error = 0.0;
};

/// Chains closed_loop_stage_solve over the stage schedule for t_final.
StagedResult staged_control_solve(const SystemState &initial, const TargetProfile &target,
                                  double t_final, double alpha, int i_max, double tol_final,
                                  const DtPolicy &policy, const SpatialGrid &grid,
                                  Exec exec = Exec::parallel);

/// Same driver over an explicit schedule (e.g. from schedule_from_lengths).
StagedResult staged_control_solve(const SystemState &initial, const TargetProfile &target,
                                  const StageSchedule &schedule, double alpha, double tol_final,
                                  const DtPolicy &policy, const SpatialGrid &grid,
                                  Exec exec = Exec::parallel);

} // namespace repairctl
