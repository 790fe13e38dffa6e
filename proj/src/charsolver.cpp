#include "repairctl/charsolver.hpp"

#include <algorithm>
#include <cmath>

#include "repairctl/errors.hpp"
#include "repairctl/travel_map.hpp"

namespace repairctl {

SystemState steady_state(const StaticPlan &plan, double lambda, const SpatialGrid &grid) {
  if (!(lambda > 0.0))
    throw InvalidParameter("failure rate lambda must be positive");
  std::vector<double> s(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    s[k] = plan.survival(grid[k]);
  SystemState out;
  out.p0 = 1.0 / (1.0 + lambda * trapezoid(grid, s));
  out.p1.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    out.p1[k] = lambda * out.p0 * s[k];
  return out;
}

namespace {

std::size_t step_count(double t_end, double dt) {
  const double ratio = t_end / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
    throw InvalidParameter("time step must divide t_end");
  return static_cast<std::size_t>(n);
}

} // namespace

Trajectory open_loop_solve(const SystemState &initial, const StaticPlan &plan, double lambda,
                           double t_end, double dt, const SpatialGrid &grid, Exec exec) {
  require_samples(grid, initial.p1, "initial state");
  if (!(dt > 0.0) || !(t_end >= 0.0))
    throw InvalidParameter("open loop needs dt > 0 and t_end >= 0");
  if (dt > grid.min_spacing() * (1.0 + 1e-12))
    throw StepSizeError("dt exceeds the smallest cell width; characteristics would cross more "
                        "than one cell per step (reduce dt or coarsen the grid)");
  const std::size_t steps = step_count(t_end, dt);

  std::vector<double> survival(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    survival[k] = plan.survival(grid[k]);

  Trajectory traj{grid, steady_state(plan, lambda, grid), {}, {}};
  traj.push(initial, 0);
  const double mass = total_mass(initial, grid);

  P0History history;
  history.push(0.0, initial.p0);

  kernels::OpenLoopProfileArgs args;
  args.grid = &grid;
  args.survival_nodes = survival;
  args.survival = &plan.survival;
  args.p1_initial = initial.p1;
  args.history = &history;
  args.lambda = lambda;

  std::vector<double> zero(grid.size()), unit(grid.size());
  for (std::size_t n = 1; n <= steps; ++n) {
    args.t = static_cast<double>(n) * dt;
    // p1 = zero + p0 (unit - zero); the trapezoid balance fixes p0
    history.push(args.t, 0.0);
    kernels::open_loop_profile(exec, args, zero);
    history.revise_latest(1.0);
    kernels::open_loop_profile(exec, args, unit);
    for (std::size_t k = 0; k < grid.size(); ++k)
      unit[k] -= zero[k];
    const double p0 = (mass - trapezoid(grid, zero)) / (1.0 + trapezoid(grid, unit));
    history.revise_latest(p0);

    SystemState next;
    next.p0 = p0;
    next.p1.resize(grid.size());
    next.t = initial.t + args.t;
    for (std::size_t k = 0; k < grid.size(); ++k)
      next.p1[k] = unit[k] == 0.0 ? zero[k] : zero[k] + p0 * unit[k];
    traj.push(std::move(next), 0);
  }
  return traj;
}

namespace {

/// Closed-loop solution on the characteristic clock c(t) = int_0^t alpha i(s) ds.
///
/// q = p1 / p1* is constant along characteristics, which advance in
/// F(x) = int_0^x p1* at rate alpha i. Hence p1(x, t) = p1*(x) g(0) lambda p0(c^{-1}(c - F(x)))
/// once c > F(x), and the initial ratio carried from F^{-1}(F(x) - c) before that. Keeping p0
/// against the clock lets consecutive stages share one history with no re-sampling in between.
class ClosedLoopEngine {
public:
  ClosedLoopEngine(const SystemState &initial, const TargetProfile &target,
                   const SpatialGrid &grid, Exec exec)
      : map_(target, 1.0, 1, grid), initial_(initial), cum_(cumulative_trapezoid(grid, initial.p1)),
        gain_(target.lambda / target.p1(0.0)), exec_(exec), state_(initial) {
    require_samples(grid, initial.p1, "initial state");
    history_.push(0.0, initial.p0);
  }

  double reach() const { return map_.horizon(); } // F(L)
  const SystemState &state() const { return state_; }
  void pin_time(double t) { state_.t = t; }

  /// Advances `length` time units at feedback weight `weight`, pushing one record per step.
  void run(Trajectory &traj, int stage, double weight, double length, double dt) {
    const auto steps = static_cast<std::size_t>(std::ceil(length / dt - 1e-9));
    const double h = length / static_cast<double>(steps);
    if (weight * h > 0.25 * reach())
      throw DelayResolutionError("dt = " + format_number(h) + " does not resolve the delay " +
                                 format_number(reach() / weight) + " (need dt <= horizon / 4)");
    const double kappa = weight * gain_;
    const double t0 = state_.t;

    kernels::ClosedLoopProfileArgs args;
    args.map = &map_;
    args.p1_initial = initial_.p1;
    args.history = &history_;
    args.gain = gain_;

    for (std::size_t n = 1; n <= steps; ++n) {
      const double a = clock_;
      const double b = clock_ + weight * h;
      const double out = outflow(a, b);
      double p0 = state_.p0;
      p0 = (p0 * (1.0 - 0.5 * kappa * h) + out) / (1.0 + 0.5 * kappa * h);
      clock_ = b;
      history_.push(clock_, p0);

      args.clock = clock_;
      SystemState next;
      next.p0 = p0;
      next.p1.resize(map_.grid().size());
      next.t = n == steps ? t0 + length : t0 + static_cast<double>(n) * h;
      kernels::closed_loop_profile(exec_, args, next.p1);
      state_ = next;
      traj.push(std::move(next), stage);
    }
  }

private:
  /// Mass leaving through x = L while the clock runs over [a, b].
  double outflow(double a, double b) const {
    const double reach_l = reach();
    double out = 0.0;
    if (a < reach_l) {
      // initial data still draining: exact integral of its linear interpolant
      const auto below = [&](double c) {
        return cumulative_integral(map_.grid(), initial_.p1, cum_, map_.inverse(reach_l - c));
      };
      out += below(a) - below(std::min(b, reach_l));
    }
    if (b > reach_l)
      out += gain_ * history_.integral(std::max(a, reach_l) - reach_l, b - reach_l);
    return out;
  }

  TravelMap map_;
  SystemState initial_;
  std::vector<double> cum_;
  double gain_;
  Exec exec_;
  P0History history_;
  double clock_ = 0.0;
  SystemState state_;
};

} // namespace

Trajectory closed_loop_stage_solve(const SystemState &initial, const TargetProfile &target,
                                   double alpha, int stage, double duration, double dt,
                                   const SpatialGrid &grid, Exec exec) {
  if (!(alpha > 0.0) || stage < 1)
    throw InvalidParameter("closed loop needs alpha > 0 and stage >= 1");
  if (!(duration > 0.0) || !(dt > 0.0))
    throw InvalidParameter("closed loop needs positive duration and dt");

  ClosedLoopEngine engine(initial, target, grid, exec);
  Trajectory traj{grid, target_state(target, grid), {}, {}};
  traj.push(initial, stage);
  traj.stage_marks[stage] = {initial.t, initial.t + duration};
  engine.run(traj, stage, alpha * stage, duration, dt);
  return traj;
}

double stage_time_step(const DtPolicy &policy, double stage_length, double horizon) {
  if (policy.steps_per_stage < 1 || !(policy.horizon_divisor >= 4.0))
    throw InvalidParameter("dt policy needs steps_per_stage >= 1 and horizon_divisor >= 4");
  return std::min(stage_length / policy.steps_per_stage, horizon / policy.horizon_divisor);
}

const char *to_string(StopReason reason) {
  switch (reason) {
  case StopReason::tolerance_reached:
    return "tolerance-reached";
  case StopReason::i_max_reached:
    return "i-max-reached";
  case StopReason::schedule_exhausted:
    return "schedule-exhausted";
  }
  return "unknown";
}

StagedResult staged_control_solve(const SystemState &initial, const TargetProfile &target,
                                  double t_final, double alpha, int i_max, double tol_final,
                                  const DtPolicy &policy, const SpatialGrid &grid, Exec exec) {
  return staged_control_solve(initial, target, build_schedule(t_final, i_max), alpha, tol_final,
                              policy, grid, exec);
}

StagedResult staged_control_solve(const SystemState &initial, const TargetProfile &target,
                                  const StageSchedule &schedule, double alpha, double tol_final,
                                  const DtPolicy &policy, const SpatialGrid &grid, Exec exec) {
  if (!(alpha > 0.0))
    throw InvalidParameter("alpha must be positive");
  if (!(tol_final >= 0.0))
    throw InvalidParameter("tol_final must be nonnegative");
  const SystemState reference = target_state(target, grid);

  StagedResult result{Trajectory{grid, reference, {}, {}}, StagedPlan{alpha, schedule, target}, {},
                      0, StopReason::i_max_reached, 0.0};
  SystemState start = initial;
  start.t = 0.0;
  ClosedLoopEngine engine(start, target, grid, exec);
  result.trajectory.push(start, 1);
  result.final_error = x_norm_distance(start, reference, grid);

  for (int i = 1; i <= schedule.i_max(); ++i) {
    const double weight = alpha * i;
    const double dt = stage_time_step(policy, schedule.length(i), engine.reach() / weight);
    if (dt < policy.min_dt) {
      result.reason = StopReason::schedule_exhausted;
      break;
    }
    engine.run(result.trajectory, i, weight, schedule.length(i), dt);
    result.trajectory.records.back().state.t = schedule.end(i);
    engine.pin_time(schedule.end(i));
    result.trajectory.stage_marks[i] = {schedule.start(i), schedule.end(i)};

    const double err = x_norm_distance(engine.state(), reference, grid);
    result.stage_end_errors.push_back(err);
    result.stages_run = i;
    result.final_error = err;
    if (err <= tol_final) {
      result.reason = StopReason::tolerance_reached;
      break;
    }
  }
  return result;
}

} // namespace repairctl
