#pragma once

#include <functional>
#include <span>
#include <vector>

#include "repairctl/grid.hpp"
#include "repairctl/travel_map.hpp"

namespace repairctl {

enum class Exec { serial, parallel };

/// p0 samples against an increasing abscissa (time for the open loop, the
/// characteristic clock for the closed loop), read back through the
/// piecewise-linear interpolant.
class P0History {
public:
  /// Abscissae must be strictly increasing.
  void push(double s, double value);
  /// Replaces the newest value, keeping its abscissa.
  void revise_latest(double value);
  std::size_t size() const { return values_.size(); }
  double latest() const { return values_.back(); }
  double span_end() const { return abscissae_.back(); }

  /// Interpolated p0(s), s clamped to the recorded span.
  double at(double s) const;
  /// Exact integral of the interpolant over [a, b] (both inside the span).
  double integral(double a, double b) const;

private:
  std::size_t segment(double s) const;
  double primitive(double s) const;

  std::vector<double> abscissae_;
  std::vector<double> values_;
  std::vector<double> cumulative_;
};

namespace kernels {

struct ClosedLoopProfileArgs {
  const TravelMap *map = nullptr;    // unit-weight map: node_times() is F(x) = int_0^x p1*
  std::span<const double> p1_initial; // density at clock 0
  const P0History *history = nullptr; // p0 against the clock
  double gain = 0.0;  // g(0) lambda = lambda / p1*(0)
  double clock = 0.0; // integral of the feedback weight alpha i over elapsed time
};

struct OpenLoopProfileArgs {
  const SpatialGrid *grid = nullptr;
  std::span<const double> survival_nodes; // S(x_j)
  const std::function<double(double)> *survival = nullptr;
  std::span<const double> p1_initial;
  const P0History *history = nullptr;
  double lambda = 0.0;
  double t = 0.0;
};

/// Ratio p1_0(psi) / p1*(psi) of the piecewise-linear interpolants (g p1 at psi).
double initial_ratio(const SpatialGrid &grid, std::span<const double> p1_initial,
                     std::span<const double> density, double psi);

namespace serial {
void closed_loop_profile(const ClosedLoopProfileArgs &args, std::span<double> out);
void open_loop_profile(const OpenLoopProfileArgs &args, std::span<double> out);
/// One first-order upwind step at unit speed with inflow on the left; `retention`
/// (optional) multiplies each cell afterwards.
void upwind_step(std::span<const double> in, double inflow, double courant,
                 std::span<const double> retention, std::span<double> out);
} // namespace serial

namespace omp {
void closed_loop_profile(const ClosedLoopProfileArgs &args, std::span<double> out);
void open_loop_profile(const OpenLoopProfileArgs &args, std::span<double> out);
void upwind_step(std::span<const double> in, double inflow, double courant,
                 std::span<const double> retention, std::span<double> out);
} // namespace omp

void closed_loop_profile(Exec exec, const ClosedLoopProfileArgs &args, std::span<double> out);
void open_loop_profile(Exec exec, const OpenLoopProfileArgs &args, std::span<double> out);
void upwind_step(Exec exec, std::span<const double> in, double inflow, double courant,
                 std::span<const double> retention, std::span<double> out);

} // namespace kernels
} // namespace repairctl
