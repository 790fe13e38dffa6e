#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "repairctl/charsolver.hpp"
#include "repairctl/diagnostics.hpp"

using namespace repairctl;

namespace {

Trajectory constant_target_trajectory(const TargetProfile &t, const SpatialGrid &g, int stages) {
  Trajectory traj{g, target_state(t, g), {}, {}};
  const auto sched = build_schedule(2.0, stages);
  auto s = target_state(t, g);
  traj.push(s, 1);
  for (int i = 1; i <= stages; ++i) {
    s.t = sched.end(i);
    traj.push(s, i);
    traj.stage_marks[i] = {sched.start(i), sched.end(i)};
  }
  return traj;
}

} // namespace

TEST_CASE("invariant audit") {
  const auto t = make_linear_target(1.0, 1.0);
  const auto g = SpatialGrid::uniform(1.0, 64);
  const auto good = constant_target_trajectory(t, g, 3);
  const auto r = audit_invariants(good, 1e-6, 1e-12);
  CHECK(r.passed);
  CHECK(r.max_mass_drift <= 1e-15);
  CHECK(r.max_endpoint_density == 0.0);

  Trajectory bad = good;
  bad.records[2].state.p0 += 0.01;
  const auto rb = audit_invariants(bad, 1e-6, 1e-12);
  CHECK(rb.max_mass_drift == doctest::Approx(0.01));
  CHECK_FALSE(rb.mass_ok);
  CHECK_FALSE(rb.passed);

  Trajectory neg = good;
  neg.records[1].state.p1[5] = -1e-9;
  CHECK_FALSE(audit_invariants(neg, 1e-6, 1e-12).nonnegative_ok);

  CHECK_THROWS_AS(audit_invariants(Trajectory{g, good.reference, {}, {}}, 1e-6, 1e-12), InvalidTrajectory);
}

TEST_CASE("audit of the open-loop canonical run") {
  const auto t = make_linear_target(1.0, 1.0);
  const auto g = SpatialGrid::uniform(1.0, 256);
  const auto plan = static_repair_rate(t, g);
  const auto traj = open_loop_solve(point_mass_good(g), plan, 1.0, 1.0, g.min_spacing(), g);
  CHECK(audit_invariants(traj, 1e-6, 1e-12).passed);
}

TEST_CASE("audit is insensitive to record order") {
  const auto t = make_linear_target(1.0, 1.0);
  const auto g = SpatialGrid::uniform(1.0, 64);
  const auto traj = closed_loop_stage_solve(point_mass_good(g), t, 1.0, 1, 1.0, 1.0 / 96, g);
  const auto base = audit_invariants(traj, 1e-6, 1e-12);
  Trajectory shuffled = traj;
  std::mt19937 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(shuffled.records.begin(), shuffled.records.end(), rng);
    const auto r = audit_invariants(shuffled, 1e-6, 1e-12);
    CHECK(r.max_mass_drift == base.max_mass_drift);
    CHECK(r.min_density == base.min_density);
    CHECK(r.max_endpoint_density == base.max_endpoint_density);
  }
}

TEST_CASE("decay fits on synthetic series") {
  std::vector<double> ts, ds;
  for (int k = 0; k <= 200; ++k) {
    ts.push_back(0.05 * k);
    ds.push_back(2.0 * std::exp(-0.5 * ts.back()));
  }
  const auto f = fit_decay_series(ts, ds, 0.0);
  CHECK(std::abs(f.amplitude - 2.0) / 2.0 <= 1e-10);
  CHECK(std::abs(f.M0 - 2.0) / 2.0 <= 1e-10);
  CHECK(std::abs(f.eps0 - 0.5) / 0.5 <= 1e-10);
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> wobble;
  for (double s : ts)
    wobble.push_back(std::exp(-s) * (1.0 + 0.01 * std::sin(s)));
  const auto w = fit_decay_series(ts, wobble, 0.1);
  CHECK(w.eps0 >= 0.95);
  CHECK(w.eps0 <= 1.05);

  // samples under the floor are dropped, the rest still fit exactly
  std::vector<double> floored = ds;
  for (std::size_t k = 150; k < floored.size(); ++k)
    floored[k] = 1e-15;
  const auto ff = fit_decay_series(ts, floored, 0.0);
  CHECK(ff.points == 150);
  CHECK(ff.eps0 == doctest::Approx(0.5).epsilon(1e-10));

  // amplitude below one is kept raw, M0 clamps
  std::vector<double> small;
  for (double s : ts)
    small.push_back(0.3 * std::exp(-2.0 * s));
  const auto sf = fit_decay_series(ts, small, 0.0);
  CHECK(sf.M0 == 1.0);
  CHECK(sf.amplitude == doctest::Approx(0.3));
}

TEST_CASE("unreliable fits carry partial results") {
  std::vector<double> ts, ds;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int k = 0; k < 50; ++k) {
    ts.push_back(k);
    ds.push_back(u(rng));
  }
  try {
    fit_decay_series(ts, ds, 0.0);
    FAIL("expected FitUnreliable");
  } catch (const FitUnreliable &e) {
    CHECK(e.partial().points == 50);
    CHECK(e.partial().r_squared < 0.9);
  }
  CHECK_THROWS_AS(fit_decay_series(std::vector<double>{0, 1}, std::vector<double>{1, 0.5}, 0.0), FitUnreliable);
}

TEST_CASE("stage envelope arithmetic") {
  DecayFit f;
  f.M0 = 1.2;
  f.eps0 = 3.0;
  CHECK(harmonic_number(1) == 1.0);
  CHECK(harmonic_number(2) == 1.5);
  CHECK(harmonic_number(3) == doctest::Approx(1.83333333333333));
  CHECK(stage_envelope(f, 0.5, 2.0, 3) == doctest::Approx(1.5 * 1.2 * std::exp(-0.5 * 3.0 * 2.0 * 11.0 / 6.0)));

  // larger alpha or eps0 tightens every stage
  DecayFit faster = f;
  faster.eps0 = 3.5;
  for (int i = 1; i <= 40; ++i) {
    CHECK(stage_envelope(f, 0.6, 1.0, i) < stage_envelope(f, 0.5, 1.0, i));
    CHECK(stage_envelope(faster, 0.5, 1.0, i) < stage_envelope(f, 0.5, 1.0, i));
    if (i > 1)
      CHECK(stage_envelope(f, 0.5, 1.0, i) < stage_envelope(f, 0.5, 1.0, i - 1));
  }
}

TEST_CASE("envelope check") {
  const auto t = make_linear_target(1.0, 1.0);
  const auto g = SpatialGrid::uniform(1.0, 64);
  const auto sched = build_schedule(2.0, 3);
  DecayFit f;
  f.eps0 = 5.0;
  const auto ok = check_stage_envelope(constant_target_trajectory(t, g, 3), sched, 1.0, f, t, g);
  CHECK(ok.passed);
  REQUIRE(ok.rows.size() == 3);
  CHECK(ok.rows[2].harmonic == doctest::Approx(11.0 / 6.0));
  for (const auto &r : ok.rows)
    CHECK(r.measured == 0.0);

  std::ostringstream csv;
  write_envelope_csv(ok, csv);
  CHECK(csv.str().rfind("i,t_i,H_i,measured,envelope,pass\n", 0) == 0);

  Trajectory bare{g, target_state(t, g), {}, {}};
  bare.push(target_state(t, g), 1);
  CHECK_THROWS_AS(check_stage_envelope(bare, sched, 1.0, f, t, g), InvalidTrajectory);
}

TEST_CASE("trajectory csv") {
  const auto t = make_linear_target(1.0, 1.0);
  const auto g = SpatialGrid::uniform(1.0, 16);
  const auto traj = constant_target_trajectory(t, g, 2);
  std::ostringstream out;
  write_trajectory_csv(traj, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,stage,p0,mass,min_p1,dist_to_target");
  std::getline(in, line);
  CHECK(line.find("6.66666666666666630e-01") != std::string::npos);
}
