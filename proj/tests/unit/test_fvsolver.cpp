#include <doctest.h>

#include <cmath>

#include "repairctl/charsolver.hpp"
#include "repairctl/errors.hpp"
#include "repairctl/fvsolver.hpp"

using namespace repairctl;

TEST_CASE("fv config validation") {
  CHECK_NOTHROW(validate(FvConfig{}));
  CHECK_THROWS_AS(validate(FvConfig{15, 0.9, 1.0}), InvalidParameter);
  CHECK_THROWS_AS(validate(FvConfig{64, 0.0, 1.0}), InvalidParameter);
  CHECK_THROWS_AS(validate(FvConfig{64, 1.2, 1.0}), InvalidParameter);
}

TEST_CASE("unit Courant number transports a square pulse exactly") {
  std::vector<double> u(32, 0.0), next(32);
  for (std::size_t k = 4; k < 9; ++k)
    u[k] = 1.0;
  for (int step = 0; step < 10; ++step) {
    kernels::serial::upwind_step(u, 0.0, 1.0, {}, next);
    u.swap(next);
  }
  for (std::size_t k = 0; k < u.size(); ++k)
    CHECK(u[k] == (k >= 14 && k < 19 ? 1.0 : 0.0));
}

TEST_CASE("open-loop fv around the steady state") {
  const auto t = make_linear_target(1.0, 1.0);
  double prev = 0.0;
  for (std::size_t cells : {128, 256, 512}) {
    const auto g = SpatialGrid::uniform(1.0, cells);
    const auto plan = static_repair_rate(t, g);
    const auto ss = steady_state(plan, 1.0, g);
    const auto traj = open_loop_fv(ss, g, plan, 1.0, FvConfig{cells, 0.9, 1.0});
    const double drift = x_norm_distance(traj.back().state, ss, g);
    CHECK(drift <= 1.0 / static_cast<double>(cells));
    if (prev > 0.0) {
      CHECK(prev / drift >= 1.7);
      CHECK(prev / drift <= 2.3);
    }
    prev = drift;
    for (const auto &r : traj.records) {
      CHECK(r.state.p0 >= 0.0);
      for (double v : r.state.p1)
        CHECK(v >= 0.0);
    }
  }
}

TEST_CASE("open-loop fv mass") {
  const auto t = make_linear_target(1.0, 1.0);
  double prev = 0.0;
  for (std::size_t cells : {256, 512}) {
    const auto g = SpatialGrid::uniform(1.0, cells);
    const auto plan = static_repair_rate(t, g);
    const auto traj = open_loop_fv(point_mass_good(g), g, plan, 1.0, FvConfig{cells, 0.9, 1.0});
    const double err = std::abs(total_mass(traj.back().state, g) - 1.0);
    CHECK(err <= 5e-3);
    if (prev > 0.0)
      CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("closed-loop fv in the travel coordinate") {
  const auto t = make_linear_target(1.0, 1.0);
  const auto g = SpatialGrid::uniform(1.0, 128);
  const auto star = target_state(t, g);
  const auto traj = closed_loop_fv_transformed(star, g, t, 1.0, 1, FvConfig{128, 0.9, 1.0});
  for (const auto &r : traj.records)
    CHECK(x_norm_distance(r.state, star, g) <= 2.0 / 128);
  CHECK(traj.stage_marks.at(1).end == doctest::Approx(1.0));
  CHECK(traj.back().state.p1.back() == 0.0);

  // same serial and parallel result
  const auto a = closed_loop_fv_transformed(point_mass_good(g), g, t, 1.0, 2, FvConfig{64, 0.9, 0.5}, Exec::serial);
  const auto b = closed_loop_fv_transformed(point_mass_good(g), g, t, 1.0, 2, FvConfig{64, 0.9, 0.5}, Exec::parallel);
  CHECK(a.back().state.p1 == b.back().state.p1);
  CHECK(a.back().state.p0 == b.back().state.p0);
}
