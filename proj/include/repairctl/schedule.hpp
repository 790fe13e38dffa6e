#pragma once

#include <vector>

namespace repairctl {

/// Partition of [0, t_f) into stages of length c0 / i^2, c0 = 6 t_f / pi^2.
///
/// Stage i covers [t_{i-1}, t_i) with t_0 = 0 and t_i = c0 * sum_{k<=i} 1/k^2.
/// Only the first i_max stages are materialized; t_{i_max} < t_f always.
class StageSchedule {
public:
  StageSchedule() = default;
  StageSchedule(double t_final, double c0, std::vector<double> endpoints);

  double t_final() const { return t_final_; }
  double c0() const { return c0_; }
  int i_max() const { return static_cast<int>(endpoints_.size()); }
  const std::vector<double> &endpoints() const { return endpoints_; }

  double start(int stage) const;
  double end(int stage) const;
  double length(int stage) const { return end(stage) - start(stage); }

  /// Stage index containing t; throws when t lies outside [0, t_{i_max}).
  int stage_at(double t) const;

private:
  double t_final_ = 0.0;
  double c0_ = 0.0;
  std::vector<double> endpoints_;
};

StageSchedule build_schedule(double t_final, int i_max);

/// Custom stage lengths (the weight of stage i stays alpha * i). Lengths must sum below t_final.
StageSchedule schedule_from_lengths(double t_final, const std::vector<double> &lengths);

/// H_i = sum_{k<=i} 1/k.
double harmonic_number(int i);

} // namespace repairctl
