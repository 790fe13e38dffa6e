#pragma once

#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "repairctl/diagnostics.hpp"
#include "repairctl/grid.hpp"
#include "repairctl/schedule.hpp"
#include "repairctl/state.hpp"
#include "repairctl/target.hpp"
#include "repairctl/trajectory.hpp"

namespace repairctl {

/// Time-independent repair rate mu(x) = -(ln p1*)'(x).
///
/// The survival function is kept in closed form, S(x) = p1*(x) / p1*(0), so that the
/// non-integrable singularity of mu at x = L is never integrated numerically.
/// `repair_density` is -S'(x) = mu(x) S(x), bounded whenever p1* is Lipschitz.
struct StaticPlan {
  TargetProfile target;
  std::function<double(double)> hazard;
  std::function<double(double)> survival;
  std::function<double(double)> repair_density;
};

/// Staged bilinear feedback: weight alpha * i on stage i of `schedule`.
struct StagedPlan {
  double alpha = 1.0;
  StageSchedule schedule;
  TargetProfile target;
};

using RepairRatePlan = std::variant<StaticPlan, StagedPlan>;

/// Throws SingularTarget if p1* vanishes at an interior node of `grid`.
StaticPlan static_repair_rate(const TargetProfile &target, const SpatialGrid &grid);

/// max{p1*(0), 1/c0, 1/(c0 eps0)}.
double select_alpha(const TargetProfile &target, double c0, double eps0);

/// Feedback hazard -p1_x/p1 + alpha i (g p1)_x / p1 with g = 1/p1*.
///
/// Entries are empty where the hazard is undefined (p1 = 0 or p1* = 0).
std::vector<std::optional<double>> evaluate_feedback_mu(const SystemState &state,
                                                        std::span<const double> dp1_dx,
                                                        const StagedPlan &plan,
                                                        const SpatialGrid &grid, double t);

struct MuScanRow {
  int stage = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  double sup = 0.0;            // sup over the stage and [0, l] of |alpha i (g p1)_x|
  bool bound_applicable = false; // t_{i-1} > 2 ||p1*||_{L1}
  double bound_observed = 0.0; // 2 alpha^2 i (g(0) lambda)^2 ||P(t_{i-1} - 2 tau_i(L)) - P*||
  double bound_fitted = 0.0;   // same bound with the fitted envelope in place of the measured error
};

struct MuScan {
  double l_frac = 0.0;
  bool hypothesis_holds = false; // t_f > 2 ||p1*||_{L1}
  std::vector<MuScanRow> rows;
};

MuScan mu_boundedness_scan(const Trajectory &traj, const StagedPlan &plan, double l_frac,
                           const std::optional<DecayFit> &fit = std::nullopt);

void write_mu_scan_csv(const MuScan &scan, std::ostream &out);

} // namespace repairctl
