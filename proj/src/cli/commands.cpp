#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>

#include <json.hpp>

#include "repairctl/charsolver.hpp"
#include "repairctl/cli.hpp"
#include "repairctl/control.hpp"
#include "repairctl/diagnostics.hpp"
#include "repairctl/fvsolver.hpp"

namespace repairctl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
  const RunConfig &cfg;
  TargetProfile target;
  SpatialGrid grid;
  fs::path out;
  std::ostream &log;
};

json report_json(const ValidationReport &r) {
  json checks = json::array();
  for (const auto &c : r.checks)
    checks.push_back({{"name", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"passed", c.passed}});
  return {{"passed", r.passed}, {"checks", checks}};
}

json report_json(const InvariantReport &r) {
  return {{"passed", r.passed},
          {"max_mass_drift", r.max_mass_drift},
          {"min_density", r.min_density},
          {"max_endpoint_density", r.max_endpoint_density},
          {"tol_mass", r.tol_mass},
          {"tol_neg", r.tol_neg},
          {"tol_endpoint", r.tol_endpoint},
          {"mass_ok", r.mass_ok},
          {"nonnegative_ok", r.nonnegative_ok},
          {"endpoint_ok", r.endpoint_ok}};
}

json report_json(const DecayFit &f) {
  return {{"M0", f.M0},
          {"amplitude", f.amplitude},
          {"eps0", f.eps0},
          {"window", {f.window_start, f.window_end}},
          {"r_squared", f.r_squared},
          {"points", f.points}};
}

json target_json(const TargetProfile &t) {
  json j{{"form", to_string(t.form)}};
  if (t.form == TargetForm::tabulated) {
    j["table-path"] = t.table_path;
  } else {
    const double scale = t.form == TargetForm::linear_decay ? t.length : t.length * t.length;
    j["params"] = {{"p0_star", t.p0_star}, {"coefficient", t.p1(0.0) / scale}};
  }
  return j;
}

json plan_json(const StagedPlan &p) {
  return {{"kind", "staged-feedback"},
          {"lambda", p.target.lambda},
          {"L", p.target.length},
          {"alpha", p.alpha},
          {"c0", p.schedule.c0()},
          {"endpoints", p.schedule.endpoints()},
          {"target", target_json(p.target)}};
}

json plan_json(const StaticPlan &p) {
  return {{"kind", "static"}, {"lambda", p.target.lambda}, {"L", p.target.length}, {"target", target_json(p.target)}};
}

void write_json(const fs::path &path, const json &j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

void write_file(const fs::path &path, const std::function<void(std::ostream &)> &body) {
  std::ofstream out(path);
  body(out);
}

bool target_passes(Context &ctx) {
  const ValidationReport r = validate_target(ctx.target, ctx.grid, ctx.cfg.tol.validate);
  for (const auto &c : r.checks)
    if (!c.passed)
      ctx.log << "target check failed: " << c.name << " (residual " << format_number(c.residual)
              << ", tolerance " << format_number(c.tolerance) << ")\n";
  return r.passed;
}

int cmd_validate(Context &ctx) {
  const ValidationReport r = validate_target(ctx.target, ctx.grid, ctx.cfg.tol.validate);
  fs::create_directories(ctx.out);
  write_json(ctx.out / "validation_report.json", report_json(r));
  for (const auto &c : r.checks)
    ctx.log << (c.passed ? "ok   " : "FAIL ") << c.name << " residual " << format_number(c.residual) << '\n';
  return r.passed ? exit_pass : exit_check_failed;
}

/// Largest step <= the smallest cell width that divides `span`. Equal to the cell width
/// (exact mass conservation) whenever the width divides `span`.
double dividing_step(double span, const SpatialGrid &grid) {
  const double h = grid.min_spacing();
  const double n = std::ceil(span / h * (1.0 - 1e-12));
  return span / std::max(n, 1.0);
}

int cmd_simulate_open(Context &ctx, const SystemState &initial) {
  const StaticPlan plan = static_repair_rate(ctx.target, ctx.grid);
  const double dt = dividing_step(ctx.cfg.t_end, ctx.grid);
  Trajectory traj = [&] {
    try {
      return open_loop_solve(initial, plan, ctx.cfg.lambda, ctx.cfg.t_end, dt, ctx.grid);
    } catch (const StepSizeError &e) {
      throw StepSizeError(std::string(e.what()) + "; use a uniform grid or reduce the time step");
    }
  }();
  const InvariantReport audit =
      audit_invariants(traj, ctx.cfg.tol.mass, ctx.cfg.tol.negativity, ctx.cfg.tol.endpoint);

  json summary{{"t_end", ctx.cfg.t_end},
               {"dt", dt},
               {"initial_distance", traj.records.front().diag.dist_to_target},
               {"final_distance", traj.back().diag.dist_to_target},
               {"steady_state_p0", traj.reference.p0}};
  try {
    summary["fit"] = report_json(fit_decay(traj, traj.reference, ctx.grid, ctx.cfg.calibration.skip));
  } catch (const FitUnreliable &e) {
    summary["fit"] = nullptr;
    ctx.log << "note: " << e.what() << '\n';
  }

  fs::create_directories(ctx.out);
  write_file(ctx.out / "trajectory.csv", [&](std::ostream &o) { write_trajectory_csv(traj, o); });
  write_json(ctx.out / "invariants.json", report_json(audit));
  write_json(ctx.out / "plan.json", plan_json(plan));
  write_json(ctx.out / "summary.json", summary);
  ctx.log << "open loop: final distance to steady state "
          << format_number(traj.back().diag.dist_to_target) << ", invariants "
          << (audit.passed ? "pass" : "FAIL") << '\n';
  return audit.passed ? exit_pass : exit_check_failed;
}

int cmd_simulate_closed_stage(Context &ctx, const SystemState &initial) {
  const StageSpec &s = ctx.cfg.stage;
  const double alpha = s.alpha.value_or(1.0);
  const double horizon = target_failure_mass(ctx.target, ctx.grid) / (alpha * s.index);
  const double dt = s.dt.value_or(horizon / 64.0);
  Trajectory traj = [&] {
    try {
      return closed_loop_stage_solve(initial, ctx.target, alpha, s.index, s.duration, dt, ctx.grid);
    } catch (const DelayResolutionError &e) {
      throw DelayResolutionError(std::string(e.what()) + "; lower stage.dt");
    }
  }();
  const InvariantReport audit =
      audit_invariants(traj, ctx.cfg.tol.mass, ctx.cfg.tol.negativity, ctx.cfg.tol.endpoint);

  json summary{{"stage", s.index},
               {"alpha", alpha},
               {"duration", s.duration},
               {"dt", dt},
               {"horizon", horizon},
               {"final_distance", traj.back().diag.dist_to_target}};
  try {
    summary["fit"] = report_json(fit_decay(traj, ctx.target, ctx.grid, ctx.cfg.calibration.skip));
  } catch (const FitUnreliable &e) {
    summary["fit"] = nullptr;
    ctx.log << "note: " << e.what() << '\n';
  }

  fs::create_directories(ctx.out);
  write_file(ctx.out / "trajectory.csv", [&](std::ostream &o) { write_trajectory_csv(traj, o); });
  write_json(ctx.out / "invariants.json", report_json(audit));
  write_json(ctx.out / "summary.json", summary);
  ctx.log << "closed-loop stage " << s.index << ": final distance "
          << format_number(traj.back().diag.dist_to_target) << ", invariants "
          << (audit.passed ? "pass" : "FAIL") << '\n';
  return audit.passed ? exit_pass : exit_check_failed;
}

struct Calibration {
  DecayFit fit;
  bool fitted = false;
  bool reliable = false;
  double alpha = 0.0;
};

/// Stage-1 run at alpha = 1 from the configured initial state, fitted for (M0, eps0).
Calibration calibrate(Context &ctx, const SystemState &initial, const StageSchedule &schedule) {
  const double mass = target_failure_mass(ctx.target, ctx.grid);
  const double duration = ctx.cfg.calibration.duration.value_or(std::max(4.0, 12.0 * mass));
  const Trajectory traj = closed_loop_stage_solve(initial, ctx.target, 1.0, 1, duration, mass / 64.0, ctx.grid);

  Calibration cal;
  try {
    cal.fit = fit_decay(traj, ctx.target, ctx.grid, ctx.cfg.calibration.skip);
    cal.fitted = true;
    cal.reliable = true;
  } catch (const FitUnreliable &e) {
    if (e.partial().points >= 3 && e.partial().eps0 > 0.0) {
      // usually a discretization floor late in the run; the envelope check reports the consequence
      cal.fit = e.partial();
      cal.fitted = true;
      ctx.log << "warning: calibration " << e.what() << "; using the partial fit eps0 = "
              << format_number(cal.fit.eps0) << '\n';
    } else if (e.partial().points >= 3) {
      throw;
    }
  }
  if (!cal.fitted) {
    // already at the target: nothing to fit, the envelope degenerates to M0
    cal.fit = DecayFit{};
    cal.fit.eps0 = 0.0;
    ctx.log << "note: calibration run never leaves the distance floor; using M0 = 1, eps0 = 0\n";
  }

  const double head = ctx.target.p1(0.0);
  if (ctx.cfg.alpha_auto) {
    cal.alpha = cal.fitted ? select_alpha(ctx.target, schedule.c0(), cal.fit.eps0)
                           : std::max(head, 1.0 / schedule.c0());
  } else {
    if (ctx.cfg.alpha_value < head)
      throw ConfigError("fixed alpha " + format_number(ctx.cfg.alpha_value) + " is below p1*(0) = " +
                        format_number(head));
    cal.alpha = ctx.cfg.alpha_value;
  }
  return cal;
}

StageSchedule make_schedule(const RunConfig &cfg) {
  return cfg.stage_lengths.empty() ? build_schedule(cfg.t_f, cfg.i_max)
                                   : schedule_from_lengths(cfg.t_f, cfg.stage_lengths);
}

struct ScanOutcome {
  MuScan scan;
  double ceiling = 0.0;
  double worst = 0.0;
  bool passed = true;
};

ScanOutcome run_scan(const Context &ctx, const StagedResult &result, const Calibration &cal) {
  ScanOutcome s;
  s.scan = mu_boundedness_scan(result.trajectory, result.plan, ctx.cfg.scan.l_frac,
                               cal.fitted ? std::optional<DecayFit>(cal.fit) : std::nullopt);
  if (s.scan.rows.size() >= 2) {
    s.ceiling = ctx.cfg.scan.ceiling_factor * s.scan.rows[1].sup;
    for (std::size_t k = 1; k < s.scan.rows.size(); ++k)
      s.worst = std::max(s.worst, s.scan.rows[k].sup);
    s.passed = s.worst <= s.ceiling;
  }
  return s;
}

int cmd_control(Context &ctx, const SystemState &initial, bool scan_only) {
  const StageSchedule schedule = make_schedule(ctx.cfg);
  const Calibration cal = calibrate(ctx, initial, schedule);
  DtPolicy policy;
  policy.steps_per_stage = ctx.cfg.steps_per_stage;
  policy.horizon_divisor = ctx.cfg.horizon_divisor;
  // the scan follows the whole schedule; an early stop would leave nothing to bound
  const double tol_final = scan_only ? 0.0 : ctx.cfg.tol.final_error;
  const StagedResult result =
      staged_control_solve(initial, ctx.target, schedule, cal.alpha, tol_final, policy, ctx.grid);
  const EnvelopeCheck envelope =
      check_stage_envelope(result.trajectory, schedule, cal.alpha, cal.fit, ctx.target, ctx.grid);
  const InvariantReport audit =
      audit_invariants(result.trajectory, ctx.cfg.tol.mass, ctx.cfg.tol.negativity, ctx.cfg.tol.endpoint);

  const double mass = target_failure_mass(ctx.target, ctx.grid);
  const bool hypothesis = ctx.cfg.t_f > 2.0 * mass;
  std::optional<ScanOutcome> scan;
  if (scan_only || ctx.cfg.scan.enabled) {
    if (hypothesis)
      scan = run_scan(ctx, result, cal);
    else
      ctx.log << "warning: boundedness scan skipped; its hypothesis t_f > 2 ||p1*||_L1 = "
              << format_number(2.0 * mass) << " does not hold\n";
  }

  json summary{{"final_error", result.final_error},
               {"tol_final", tol_final},
               {"stages_run", result.stages_run},
               {"stop_reason", to_string(result.reason)},
               {"alpha", cal.alpha},
               {"alpha_policy", ctx.cfg.alpha_auto ? "auto" : "fixed"},
               {"c0", schedule.c0()},
               {"eps0", cal.fit.eps0},
               {"calibration", cal.fitted ? report_json(cal.fit) : json(nullptr)},
               {"calibration_reliable", cal.reliable},
               {"envelope_passed", envelope.passed},
               {"envelope_multiplier", envelope.multiplier},
               {"invariants_passed", audit.passed},
               {"stage_end_errors", result.stage_end_errors}};
  if (scan)
    summary["mu_scan"] = {{"l_frac", scan->scan.l_frac},
                          {"ceiling", scan->ceiling},
                          {"worst_after_stage_1", scan->worst},
                          {"passed", scan->passed}};

  fs::create_directories(ctx.out);
  write_file(ctx.out / "trajectory.csv", [&](std::ostream &o) { write_trajectory_csv(result.trajectory, o); });
  write_file(ctx.out / "envelope.csv", [&](std::ostream &o) { write_envelope_csv(envelope, o); });
  write_json(ctx.out / "summary.json", summary);
  write_json(ctx.out / "plan.json", plan_json(result.plan));
  write_json(ctx.out / "invariants.json", report_json(audit));
  if (scan)
    write_file(ctx.out / "mu_scan.csv", [&](std::ostream &o) { write_mu_scan_csv(scan->scan, o); });

  for (const auto &row : envelope.rows)
    if (!row.passed)
      ctx.log << "envelope exceeded at stage " << row.stage << ": " << format_number(row.measured) << " > "
              << format_number(row.envelope) << '\n';
  ctx.log << "control: alpha " << format_number(cal.alpha) << ", " << result.stages_run << " stages ("
          << to_string(result.reason) << "), final error " << format_number(result.final_error) << '\n';

  if (scan_only) {
    if (!scan)
      return exit_check_failed;
    ctx.log << "mu scan: worst sup after stage 1 " << format_number(scan->worst) << ", ceiling "
            << format_number(scan->ceiling) << '\n';
    return scan->passed ? exit_pass : exit_check_failed;
  }
  const bool reached = result.final_error <= ctx.cfg.tol.final_error;
  if (!reached)
    ctx.log << "target not reached: achieved error " << format_number(result.final_error) << " > "
            << format_number(ctx.cfg.tol.final_error) << '\n';
  return reached && envelope.passed ? exit_pass : exit_check_failed;
}

double observed_order(double coarse, double fine, double ratio) { return std::log(coarse / fine) / std::log(ratio); }

int cmd_compare(Context &ctx) {
  const RunConfig &cfg = ctx.cfg;
  const double alpha = cfg.stage.alpha.value_or(1.0);
  const int stage = cfg.stage.index;
  FvConfig fv_open{0, cfg.fv.cfl, cfg.fv.t_end};
  FvConfig fv_closed{0, cfg.fv.cfl, cfg.fv.stage_duration};

  struct Row {
    std::string model;
    std::size_t cells;
    double difference;
    double order;
  };
  std::vector<Row> rows;
  bool ok = true;
  double prev_open = 0.0, prev_closed = 0.0;
  std::size_t prev_cells = 0;
  for (std::size_t cells : cfg.fv.levels) {
    const SpatialGrid grid = SpatialGrid::uniform(cfg.length, cells);
    const SystemState initial = build_initial(cfg, ctx.target, grid);
    const StaticPlan plan = static_repair_rate(ctx.target, grid);

    fv_open.cells = cells;
    const Trajectory exact_open = open_loop_solve(initial, plan, cfg.lambda, cfg.fv.t_end, dividing_step(cfg.fv.t_end, grid), grid);
    const Trajectory fv_traj = open_loop_fv(initial, grid, plan, cfg.lambda, fv_open);
    const double d_open = x_norm_distance(exact_open.back().state, fv_traj.back().state, grid);

    fv_closed.cells = cells;
    const double horizon = target_failure_mass(ctx.target, grid) / (alpha * stage);
    const Trajectory exact_closed =
        closed_loop_stage_solve(initial, ctx.target, alpha, stage, cfg.fv.stage_duration, horizon / cells, grid);
    const Trajectory fv_closed_traj = closed_loop_fv_transformed(initial, grid, ctx.target, alpha, stage, fv_closed);
    const double d_closed = x_norm_distance(exact_closed.back().state, fv_closed_traj.back().state, grid);

    double o_open = std::nan(""), o_closed = std::nan("");
    if (prev_cells) {
      const double ratio = static_cast<double>(cells) / static_cast<double>(prev_cells);
      o_open = observed_order(prev_open, d_open, ratio);
      o_closed = observed_order(prev_closed, d_closed, ratio);
      ok = ok && o_open >= cfg.fv.min_order && o_closed >= cfg.fv.min_order;
    }
    rows.push_back({"open-loop", cells, d_open, o_open});
    rows.push_back({"closed-loop-stage", cells, d_closed, o_closed});
    prev_open = d_open;
    prev_closed = d_closed;
    prev_cells = cells;
  }

  fs::create_directories(ctx.out);
  write_file(ctx.out / "compare.csv", [&](std::ostream &o) {
    o << "model,cells,difference,order\n";
    for (const auto &r : rows)
      o << r.model << ',' << r.cells << ',' << format_number(r.difference) << ','
        << (std::isnan(r.order) ? std::string() : format_number(r.order)) << '\n';
  });
  for (const auto &r : rows)
    ctx.log << r.model << " cells " << r.cells << " difference " << format_number(r.difference)
            << (std::isnan(r.order) ? std::string() : " order " + format_number(r.order)) << '\n';
  return ok ? exit_pass : exit_check_failed;
}

} // namespace

int run_command(const std::string &name, const RunConfig &cfg, const fs::path &out_dir, std::ostream &log) {
  if (std::find(std::begin(command_names), std::end(command_names), name) == std::end(command_names)) {
    log << "unknown command '" << name << "'\n";
    return exit_usage;
  }
  std::optional<Context> ctx;
  std::optional<SystemState> initial;
  try {
    ctx.emplace(Context{cfg, build_target(cfg), build_grid(cfg), out_dir, log});
    if (name == "validate")
      return cmd_validate(*ctx);
    initial = build_initial(cfg, ctx->target, ctx->grid);
  } catch (const ConfigError &e) {
    log << "config error: " << e.what() << '\n';
    return exit_usage;
  } catch (const InvalidParameter &e) {
    log << "config error: " << e.what() << '\n';
    return exit_usage;
  }

  if (!target_passes(*ctx)) {
    log << "target failed validation; nothing written\n";
    return exit_check_failed;
  }
  try {
    if (name == "simulate-open")
      return cmd_simulate_open(*ctx, *initial);
    if (name == "simulate-closed-stage")
      return cmd_simulate_closed_stage(*ctx, *initial);
    if (name == "control")
      return cmd_control(*ctx, *initial, false);
    if (name == "scan-mu")
      return cmd_control(*ctx, *initial, true);
    return cmd_compare(*ctx);
  } catch (const ConfigError &e) {
    log << "config error: " << e.what() << '\n';
    return exit_usage;
  } catch (const InvalidParameter &e) {
    log << "config error: " << e.what() << '\n';
    return exit_usage;
  } catch (const Error &e) {
    log << "error: " << e.what() << '\n';
    return exit_check_failed;
  }
}

} // namespace repairctl::cli
