#pragma once

#include <span>
#include <vector>

#include "repairctl/errors.hpp"
#include "repairctl/schedule.hpp"
#include "repairctl/target.hpp"
#include "repairctl/trajectory.hpp"

namespace repairctl {

struct InvariantReport {
  double max_mass_drift = 0.0;
  double min_density = 0.0; // smallest p0 or p1 sample seen
  double max_endpoint_density = 0.0;
  double tol_mass = 0.0;
  double tol_neg = 0.0;
  double tol_endpoint = 0.0;
  bool mass_ok = false;
  bool nonnegative_ok = false;
  bool endpoint_ok = false;
  bool passed = false;
};

InvariantReport audit_invariants(const Trajectory &traj, double tol_mass, double tol_neg,
                                 double tol_endpoint = 1e-10);

/// dist(t) ~ M0 exp(-eps0 t) fitted on log-distance.
struct DecayFit {
  double M0 = 1.0;        // max(1, amplitude)
  double amplitude = 1.0; // exp(intercept), unclamped
  double eps0 = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

class FitUnreliable : public Error {
public:
  FitUnreliable(const std::string &what, DecayFit partial) : Error(what), partial_(partial) {}
  const DecayFit &partial() const { return partial_; }

private:
  DecayFit partial_;
};

/// Distances at or below this floor are dropped before fitting.
inline constexpr double fit_distance_floor = 1e-13;

DecayFit fit_decay_series(std::span<const double> times, std::span<const double> distances,
                          double skip_fraction);

/// Fits the X-norm distance between each recorded state and the target.
DecayFit fit_decay(const Trajectory &traj, const TargetProfile &target, const SpatialGrid &grid,
                   double skip_fraction);

/// Same, against an explicit reference state (e.g. the open-loop steady state).
DecayFit fit_decay(const Trajectory &traj, const SystemState &reference, const SpatialGrid &grid,
                   double skip_fraction);

struct EnvelopeRow {
  int stage = 0;
  double t_end = 0.0;
  double harmonic = 0.0;
  double measured = 0.0;
  double envelope = 0.0;
  bool passed = false;
};

struct EnvelopeCheck {
  std::vector<EnvelopeRow> rows;
  double multiplier = 1.5;
  bool passed = false;
};

inline constexpr double default_envelope_multiplier = 1.5;

/// multiplier * M0 * exp(-alpha eps0 c0 H_i).
double stage_envelope(const DecayFit &fit, double alpha, double c0, int stage,
                      double multiplier = default_envelope_multiplier);

/// Compares each completed stage's end-state error with the decay envelope.
EnvelopeCheck check_stage_envelope(const Trajectory &traj, const StageSchedule &schedule, double alpha,
                                   const DecayFit &fit, const TargetProfile &target,
                                   const SpatialGrid &grid,
                                   double multiplier = default_envelope_multiplier);

void write_envelope_csv(const EnvelopeCheck &check, std::ostream &out);

} // namespace repairctl
