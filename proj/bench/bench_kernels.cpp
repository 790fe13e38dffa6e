#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "repairctl/control.hpp"
#include "repairctl/kernels.hpp"
#include "repairctl/target.hpp"
#include "repairctl/travel_map.hpp"

using namespace repairctl;

namespace {

struct Fixture {
  explicit Fixture(std::size_t cells)
      : target(make_linear_target(1.0, 1.0)), grid(SpatialGrid::uniform(1.0, cells)),
        plan(static_repair_rate(target, grid)), unit(target, 1.0, 1, grid),
        initial(compatible_state(target, grid, 0.5)), out(grid.size()), retention(grid.size(), 0.99) {
    for (int k = 0; k <= 4096; ++k)
      history.push(k / 1024.0, 0.6 + 0.05 * std::sin(k / 100.0));
    for (std::size_t k = 0; k < grid.size(); ++k)
      survival.push_back(plan.survival(grid[k]));
  }
  TargetProfile target;
  SpatialGrid grid;
  StaticPlan plan;
  TravelMap unit;
  SystemState initial;
  P0History history;
  std::vector<double> survival, out, retention;
};

template <Exec E> void closed_profile(benchmark::State &state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  kernels::ClosedLoopProfileArgs args{&f.unit, f.initial.p1, &f.history, 1.5, 2.0};
  for (auto _ : state) {
    kernels::closed_loop_profile(E, args, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
}

template <Exec E> void open_profile(benchmark::State &state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  kernels::OpenLoopProfileArgs args{&f.grid, f.survival, &f.plan.survival, f.initial.p1, &f.history, 1.0, 2.0};
  for (auto _ : state) {
    kernels::open_loop_profile(E, args, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
}

template <Exec E> void upwind(benchmark::State &state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    kernels::upwind_step(E, f.initial.p1, 0.5, 0.9, f.retention, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
}

} // namespace

BENCHMARK(closed_profile<Exec::serial>)->RangeMultiplier(8)->Range(512, 1 << 18);
BENCHMARK(closed_profile<Exec::parallel>)->RangeMultiplier(8)->Range(512, 1 << 18);
BENCHMARK(open_profile<Exec::serial>)->RangeMultiplier(8)->Range(512, 1 << 18);
BENCHMARK(open_profile<Exec::parallel>)->RangeMultiplier(8)->Range(512, 1 << 18);
BENCHMARK(upwind<Exec::serial>)->RangeMultiplier(8)->Range(512, 1 << 18);
BENCHMARK(upwind<Exec::parallel>)->RangeMultiplier(8)->Range(512, 1 << 18);

BENCHMARK_MAIN();
