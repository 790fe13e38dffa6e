// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "repairctl/charsolver.hpp"
#include "repairctl/control.hpp"
#include "repairctl/diagnostics.hpp"
#include "repairctl/fvsolver.hpp"
#include "repairctl/travel_map.hpp"

using namespace repairctl;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string &detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  if (!ok)
    ++failures;
}

std::string fmt(const char *pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

// sample and endpoint audit only; mass is judged separately
struct SignCheck {
  double min_sample = 0.0;
  double max_end = 0.0;
  void add(const Trajectory &traj) {
    const auto r = audit_invariants(traj, 1.0, 1e-12, 1e-10);
    min_sample = std::min(min_sample, r.min_density);
    max_end = std::max(max_end, r.max_endpoint_density);
  }
};

} // namespace

int main() {
  const double lambda = 1.0, length = 1.0;
  const auto target = make_linear_target(lambda, length);
  const auto grid = SpatialGrid::uniform(length, 512);
  const auto plan = static_repair_rate(target, grid);
  const double mass_star = target_failure_mass(target, grid);
  const auto start = point_mass_good(grid);
  const auto compatible = compatible_state(target, grid, 0.5);
  SignCheck signs;

  // 1: conservation
  {
    const auto open = open_loop_solve(start, plan, lambda, 5.0, grid.min_spacing(), grid);
    const auto open_audit = audit_invariants(open, 1e-6, 1e-12);
    const auto schedule = build_schedule(2.0, 40);
    const auto staged = staged_control_solve(compatible, target, schedule, 1.0 / schedule.c0(), 0.0, DtPolicy{}, grid);
    double worst_stage = 0.0;
    for (const auto &r : staged.trajectory.records)
      worst_stage = std::max(worst_stage, std::abs(r.diag.mass - 1.0));
    const auto single = closed_loop_stage_solve(compatible, target, 1.0, 1, 4.0, mass_star / 64.0, grid);
    const double single_drift = audit_invariants(single, 1e-6, 1e-12).max_mass_drift;
    signs.add(open);
    signs.add(staged.trajectory);
    signs.add(single);
    report(1, open_audit.max_mass_drift <= 1e-6 && worst_stage <= 1e-6 && single_drift <= 1e-6,
           fmt("open-loop drift %.2e, closed-loop drift %.2e over 40 stages, %.2e on stage 1",
               open_audit.max_mass_drift, worst_stage, single_drift));
  }

  // 2: steady state of the static design is the target
  {
    const auto ss = steady_state(plan, lambda, grid);
    double err = std::abs(ss.p0 - 2.0 / 3.0);
    for (std::size_t k = 0; k < grid.size(); ++k)
      err = std::max(err, std::abs(ss.p1[k] - (2.0 / 3.0) * (1.0 - grid[k])));
    report(2, err <= 1e-12, fmt("max deviation from (2/3, (2/3)(1-x)) %.2e", err));
  }

  // 3: open-loop decay
  {
    const auto open = open_loop_solve(start, plan, lambda, 5.0, grid.min_spacing(), grid);
    try {
      const auto fit = fit_decay(open, open.reference, grid, 0.2);
      report(3, fit.eps0 > 0.0 && fit.r_squared >= 0.98, fmt("eps0 %.4f, R^2 %.5f", fit.eps0, fit.r_squared));
    } catch (const FitUnreliable &e) {
      report(3, false, std::string("fit unreliable: ") + e.what());
    }
  }

  // 4: stage-1 decay, also the calibration for 5 and 8
  DecayFit calibration;
  {
    const auto stage1 = closed_loop_stage_solve(start, target, 1.0, 1, 4.0, mass_star / 64.0, grid);
    signs.add(stage1);
    try {
      calibration = fit_decay(stage1, target, grid, 0.2);
      report(4, calibration.eps0 > 0.0 && calibration.r_squared >= 0.98,
             fmt("eps0 %.4f, R^2 %.5f, M0 %.4f", calibration.eps0, calibration.r_squared, calibration.M0));
    } catch (const FitUnreliable &e) {
      calibration = e.partial();
      report(4, false, std::string("fit unreliable: ") + e.what());
    }
  }

  // 5 and 8 share the canonical staged run
  const auto schedule = build_schedule(2.0, 40);
  const double alpha = select_alpha(target, schedule.c0(), std::max(calibration.eps0, 1e-300));
  const auto run = staged_control_solve(start, target, schedule, alpha, 0.0, DtPolicy{}, grid);
  signs.add(run.trajectory);
  {
    const auto env = check_stage_envelope(run.trajectory, schedule, alpha, calibration, target, grid);
    double worst_ratio = 0.0;
    for (const auto &row : env.rows)
      worst_ratio = std::max(worst_ratio, row.measured / row.envelope);
    report(5, run.final_error <= 1e-3 && env.passed && static_cast<int>(env.rows.size()) == 40,
           fmt("alpha %.4f, final error %.2e, worst error/envelope %.3f", alpha, run.final_error, worst_ratio));
  }

  // 6: FV against characteristics
  {
    std::vector<double> open_diff, closed_diff;
    for (std::size_t cells : {128, 256, 512}) {
      const auto g = SpatialGrid::uniform(length, cells);
      const auto init = compatible_state(target, g, 0.5);
      const auto p = static_repair_rate(target, g);
      const auto exact_open = open_loop_solve(init, p, lambda, 1.0, g.min_spacing(), g);
      const auto fv_open = open_loop_fv(init, g, p, lambda, FvConfig{cells, 0.9, 1.0});
      open_diff.push_back(x_norm_distance(exact_open.back().state, fv_open.back().state, g));
      const double horizon = target_failure_mass(target, g);
      const auto exact_closed = closed_loop_stage_solve(init, target, 1.0, 1, 0.3, horizon / cells, g);
      const auto fv_closed = closed_loop_fv_transformed(init, g, target, 1.0, 1, FvConfig{cells, 0.9, 0.3});
      closed_diff.push_back(x_norm_distance(exact_closed.back().state, fv_closed.back().state, g));
      signs.add(fv_open);
      signs.add(fv_closed);
    }
    double worst = 1e300;
    std::string detail = "orders open";
    for (const auto *d : {&open_diff, &closed_diff}) {
      for (std::size_t k = 1; k < d->size(); ++k) {
        const double order = std::log2((*d)[k - 1] / (*d)[k]);
        worst = std::min(worst, order);
        detail += fmt(" %.3f", order);
      }
      if (d == &open_diff)
        detail += ", closed";
    }
    report(6, worst >= 0.9, detail);
  }

  // 7: travel map
  {
    double err = 0.0;
    for (int stage : {1, 3, 17}) {
      const TravelMap map(target, 0.8, stage, grid);
      for (std::size_t k = 0; k < grid.size(); ++k)
        err = std::max(err, std::abs(map.inverse(map.forward(grid[k])) - grid[k]));
    }
    const TravelMap canonical(target, 1.0, 1, grid);
    const double closed = std::abs(canonical.inverse(0.2) - (1.0 - std::sqrt(0.4)));
    report(7, err <= 1e-10 * length && closed <= 1e-10,
           fmt("round trip %.2e, inverse(0.2) error %.2e", err, closed));
  }

  // 8: mu boundedness over [0, 0.9 L]
  {
    const auto scan = mu_boundedness_scan(run.trajectory, run.plan, 0.9, calibration);
    bool ok = scan.hypothesis_holds && scan.rows.size() >= 2;
    double ceiling = 0.0, worst = 0.0;
    if (ok) {
      ceiling = 10.0 * scan.rows[1].sup;
      for (std::size_t k = 1; k < scan.rows.size(); ++k)
        worst = std::max(worst, scan.rows[k].sup);
      ok = worst <= ceiling;
    }
    report(8, ok,
           fmt("%.0f stages, worst sup from stage 2 on %.4f, ceiling %.4f",
               static_cast<double>(scan.rows.size()), worst, ceiling));
  }

  // 9: sign and endpoint over every trajectory above
  report(9, signs.min_sample >= -1e-12 && signs.max_end <= 1e-10,
         fmt("smallest sample %.2e, largest p1(L) %.2e", signs.min_sample, signs.max_end));

  return failures == 0 ? 0 : 1;
}
