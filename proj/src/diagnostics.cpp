#include "repairctl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace repairctl {

InvariantReport audit_invariants(const Trajectory &traj, double tol_mass, double tol_neg,
                                 double tol_endpoint) {
  if (traj.empty())
    throw InvalidTrajectory("cannot audit an empty trajectory");
  InvariantReport r;
  r.tol_mass = tol_mass;
  r.tol_neg = tol_neg;
  r.tol_endpoint = tol_endpoint;
  r.min_density = std::numeric_limits<double>::infinity();
  for (const auto &rec : traj.records) {
    const SystemState &s = rec.state;
    r.max_mass_drift = std::max(r.max_mass_drift, std::abs(total_mass(s, traj.grid) - 1.0));
    r.min_density = std::min(r.min_density, s.p0);
    for (double v : s.p1)
      r.min_density = std::min(r.min_density, v);
    r.max_endpoint_density = std::max(r.max_endpoint_density, std::abs(s.p1.back()));
  }
  r.mass_ok = r.max_mass_drift <= tol_mass;
  r.nonnegative_ok = r.min_density >= -tol_neg;
  r.endpoint_ok = r.max_endpoint_density <= tol_endpoint;
  r.passed = r.mass_ok && r.nonnegative_ok && r.endpoint_ok;
  return r;
}

DecayFit fit_decay_series(std::span<const double> times, std::span<const double> distances,
                          double skip_fraction) {
  if (times.size() != distances.size())
    throw InvalidParameter("fit: times and distances differ in length");
  if (!(skip_fraction >= 0.0 && skip_fraction < 1.0))
    throw InvalidParameter("fit: skip_fraction must lie in [0, 1)");

  const auto first = static_cast<std::size_t>(std::floor(skip_fraction * static_cast<double>(times.size())));
  std::vector<double> t, y;
  for (std::size_t k = first; k < times.size(); ++k) {
    if (distances[k] > fit_distance_floor) {
      t.push_back(times[k]);
      y.push_back(std::log(distances[k]));
    }
  }
  DecayFit fit;
  fit.points = t.size();
  if (t.size() < 3)
    throw FitUnreliable("fit: fewer than 3 samples above the distance floor", fit);
  fit.window_start = t.front();
  fit.window_end = t.back();

  const double n = static_cast<double>(t.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    mt += t[k];
    my += y[k];
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    stt += (t[k] - mt) * (t[k] - mt);
    sty += (t[k] - mt) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (!(stt > 0.0))
    throw FitUnreliable("fit: all samples share one time", fit);
  const double slope = sty / stt;
  const double intercept = my - slope * mt;
  double ss_res = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double e = y[k] - (intercept + slope * t[k]);
    ss_res += e * e;
  }
  fit.eps0 = -slope;
  fit.amplitude = std::exp(intercept);
  fit.M0 = std::max(1.0, fit.amplitude);
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;

  if (fit.r_squared < 0.9)
    throw FitUnreliable("fit: log-distance is not linear over the window (R^2 = " +
                            format_number(fit.r_squared) + ")",
                        fit);
  if (!(fit.eps0 > 0.0))
    throw FitUnreliable("fit: distance is not decaying", fit);
  return fit;
}

DecayFit fit_decay(const Trajectory &traj, const SystemState &reference, const SpatialGrid &grid,
                   double skip_fraction) {
  if (!(grid == traj.grid))
    throw IncompatibleGrids("fit: trajectory lives on a different grid");
  std::vector<double> t, d;
  t.reserve(traj.records.size());
  d.reserve(traj.records.size());
  for (const auto &rec : traj.records) {
    t.push_back(rec.state.t);
    d.push_back(x_norm_distance(rec.state, reference, grid));
  }
  return fit_decay_series(t, d, skip_fraction);
}

DecayFit fit_decay(const Trajectory &traj, const TargetProfile &target, const SpatialGrid &grid,
                   double skip_fraction) {
  return fit_decay(traj, target_state(target, grid), grid, skip_fraction);
}

double stage_envelope(const DecayFit &fit, double alpha, double c0, int stage, double multiplier) {
  return multiplier * fit.M0 * std::exp(-alpha * fit.eps0 * c0 * harmonic_number(stage));
}

EnvelopeCheck check_stage_envelope(const Trajectory &traj, const StageSchedule &schedule, double alpha,
                                   const DecayFit &fit, const TargetProfile &target,
                                   const SpatialGrid &grid, double multiplier) {
  if (traj.stage_marks.empty())
    throw InvalidTrajectory("trajectory carries no stage markers");
  const SystemState reference = target_state(target, grid);
  EnvelopeCheck check;
  check.multiplier = multiplier;
  check.passed = true;
  for (const auto &[stage, mark] : traj.stage_marks) {
    const TrajectoryRecord *rec = traj.at_time(mark.end, 1e-9 * std::max(1.0, mark.end));
    if (!rec)
      throw InvalidTrajectory("no record at the end of stage " + std::to_string(stage));
    EnvelopeRow row;
    row.stage = stage;
    row.t_end = mark.end;
    row.harmonic = harmonic_number(stage);
    row.measured = x_norm_distance(rec->state, reference, grid);
    row.envelope = stage_envelope(fit, alpha, schedule.c0(), stage, multiplier);
    row.passed = row.measured <= row.envelope;
    check.passed = check.passed && row.passed;
    check.rows.push_back(row);
  }
  return check;
}

void write_envelope_csv(const EnvelopeCheck &check, std::ostream &out) {
  out << "i,t_i,H_i,measured,envelope,pass\n";
  for (const auto &r : check.rows)
    out << r.stage << ',' << format_number(r.t_end) << ',' << format_number(r.harmonic) << ','
        << format_number(r.measured) << ',' << format_number(r.envelope) << ','
        << (r.passed ? "true" : "false") << '\n';
}

} // namespace repairctl
