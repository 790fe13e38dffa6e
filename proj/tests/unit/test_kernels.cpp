#include <doctest.h>

#include <cmath>

#include "repairctl/charsolver.hpp"
#include "repairctl/errors.hpp"
#include "repairctl/kernels.hpp"

using namespace repairctl;

TEST_CASE("p0 history interpolation and integrals") {
  P0History h;
  h.push(0.0, 1.0);
  h.push(0.5, 2.0);
  h.push(2.0, 0.5);
  CHECK(h.at(-1.0) == 1.0);
  CHECK(h.at(0.25) == doctest::Approx(1.5));
  CHECK(h.at(1.25) == doctest::Approx(1.25));
  CHECK(h.at(5.0) == 0.5);
  // piecewise-linear areas: [0, 0.5] -> 0.75, [0.5, 2] -> 1.875
  CHECK(h.integral(0.0, 2.0) == doctest::Approx(2.625));
  CHECK(h.integral(0.25, 1.25) == doctest::Approx(0.5 * 0.25 * (1.5 + 2.0) + 0.5 * 0.75 * (2.0 + 1.25)));
  CHECK(h.integral(1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(h.push(2.0, 1.0), InvalidParameter);
  h.revise_latest(1.5);
  CHECK(h.latest() == 1.5);
  CHECK(h.integral(0.0, 2.0) == doctest::Approx(0.75 + 0.75 * 3.5));
  CHECK_THROWS_AS(P0History{}.revise_latest(1.0), InvalidParameter);
}

TEST_CASE("serial and OpenMP kernels agree bit for bit") {
  const auto t = make_quadratic_target(1.3, 2.0);
  const auto g = SpatialGrid::uniform(2.0, 300);
  const auto init = compatible_state(t, g, 0.6);

  const TravelMap unit(t, 1.0, 1, g);
  P0History hist;
  for (int k = 0; k <= 100; ++k)
    hist.push(0.01 * k, 0.6 + 0.1 * std::sin(0.3 * k));
  kernels::ClosedLoopProfileArgs ca{&unit, init.p1, &hist, t.lambda / t.p1(0.0), 0.4};
  std::vector<double> s1(g.size()), p1(g.size());
  kernels::serial::closed_loop_profile(ca, s1);
  kernels::omp::closed_loop_profile(ca, p1);
  CHECK(s1 == p1);

  const auto plan = static_repair_rate(t, g);
  std::vector<double> surv(g.size());
  for (std::size_t k = 0; k < g.size(); ++k)
    surv[k] = plan.survival(g[k]);
  kernels::OpenLoopProfileArgs oa{&g, surv, &plan.survival, init.p1, &hist, t.lambda, 0.7};
  kernels::serial::open_loop_profile(oa, s1);
  kernels::omp::open_loop_profile(oa, p1);
  CHECK(s1 == p1);

  std::vector<double> ret(g.size(), 0.97), a(g.size()), b(g.size());
  kernels::serial::upwind_step(init.p1, 0.3, 0.8, ret, a);
  kernels::omp::upwind_step(init.p1, 0.3, 0.8, ret, b);
  CHECK(a == b);

  std::vector<double> wrong(5);
  CHECK_THROWS_AS(kernels::serial::upwind_step(init.p1, 0.3, 0.8, {}, wrong), IncompatibleGrids);
}

TEST_CASE("solvers are identical under both execution modes") {
  const auto t = make_linear_target(1.0, 1.0);
  const auto g = SpatialGrid::uniform(1.0, 128);
  const auto plan = static_repair_rate(t, g);
  const auto a = open_loop_solve(point_mass_good(g), plan, 1.0, 1.0, g.min_spacing(), g, Exec::serial);
  const auto b = open_loop_solve(point_mass_good(g), plan, 1.0, 1.0, g.min_spacing(), g, Exec::parallel);
  CHECK(a.back().state.p1 == b.back().state.p1);
  const auto c = staged_control_solve(point_mass_good(g), t, 2.0, 1.0, 10, 0.0, DtPolicy{}, g, Exec::serial);
  const auto d = staged_control_solve(point_mass_good(g), t, 2.0, 1.0, 10, 0.0, DtPolicy{}, g, Exec::parallel);
  CHECK(c.stage_end_errors == d.stage_end_errors);
}
