#pragma once

#include <cstddef>

#include "repairctl/control.hpp"
#include "repairctl/kernels.hpp"
#include "repairctl/state.hpp"
#include "repairctl/target.hpp"
#include "repairctl/trajectory.hpp"

namespace repairctl {

struct FvConfig {
  std::size_t cells = 256;
  double cfl = 0.9;
  double t_end = 1.0;
};

void validate(const FvConfig &cfg);

/// First-order upwind finite-volume solver for the open loop.
///
/// Works on `cfg.cells` uniform cells over [0, L]. The sink is applied as a per-cell
/// survival ratio and every unit of mass it removes, plus the outflow at x = L,
/// returns to p0. Output states live on the uniform node grid with
/// cells + 1 nodes: node 0 carries the inflow value lambda p0, interior nodes average
/// their neighbouring cells, node N is zero.
Trajectory open_loop_fv(const SystemState &initial, const SpatialGrid &initial_grid,
                        const StaticPlan &plan, double lambda, const FvConfig &cfg,
                        Exec exec = Exec::parallel);

/// Upwind solver for one closed-loop stage in the travel coordinate y = tau(x).
///
/// phi = alpha i g p1 is advected at unit speed on [0, horizon] with inflow
/// alpha i g(0) lambda p0. `cfg.cells` counts y-cells; states are mapped back to
/// `grid` through p1 = phi p1* / (alpha i). `cfg.t_end` is the stage duration.
Trajectory closed_loop_fv_transformed(const SystemState &initial, const SpatialGrid &grid,
                                      const TargetProfile &target, double alpha, int stage,
                                      const FvConfig &cfg, Exec exec = Exec::parallel);

} // namespace repairctl
