#include "repairctl/schedule.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "repairctl/errors.hpp"

namespace repairctl {

StageSchedule::StageSchedule(double t_final, double c0, std::vector<double> endpoints)
    : t_final_(t_final), c0_(c0), endpoints_(std::move(endpoints)) {}

double StageSchedule::start(int stage) const { return stage <= 1 ? 0.0 : end(stage - 1); }

double StageSchedule::end(int stage) const {
  if (stage < 1 || stage > i_max())
    throw InvalidParameter("stage " + std::to_string(stage) + " outside schedule");
  return endpoints_[static_cast<std::size_t>(stage - 1)];
}

int StageSchedule::stage_at(double t) const {
  if (t < 0.0 || endpoints_.empty() || t >= endpoints_.back())
    throw InvalidParameter("time outside the materialized schedule");
  for (int i = 1; i <= i_max(); ++i)
    if (t < end(i))
      return i;
  return i_max();
}

StageSchedule build_schedule(double t_final, int i_max) {
  if (!(t_final > 0.0))
    throw InvalidParameter("final time must be positive");
  if (i_max < 1)
    throw InvalidParameter("i_max must be at least 1");
  const double c0 = 6.0 * t_final / (std::numbers::pi * std::numbers::pi);
  std::vector<double> endpoints(static_cast<std::size_t>(i_max));
  double partial = 0.0;
  for (int k = 1; k <= i_max; ++k) {
    partial += 1.0 / (static_cast<double>(k) * static_cast<double>(k));
    endpoints[static_cast<std::size_t>(k - 1)] = c0 * partial;
  }
  return StageSchedule(t_final, c0, std::move(endpoints));
}

StageSchedule schedule_from_lengths(double t_final, const std::vector<double> &lengths) {
  if (lengths.empty())
    throw InvalidParameter("schedule needs at least one stage");
  std::vector<double> endpoints;
  double t = 0.0;
  for (double len : lengths) {
    if (!(len > 0.0))
      throw InvalidParameter("stage lengths must be positive");
    t += len;
    endpoints.push_back(t);
  }
  if (!(t < t_final))
    throw InvalidParameter("stage lengths must sum below the final time");
  return StageSchedule(t_final, lengths.front(), std::move(endpoints));
}

double harmonic_number(int i) {
  double h = 0.0;
  for (int k = 1; k <= i; ++k)
    h += 1.0 / static_cast<double>(k);
  return h;
}

} // namespace repairctl
