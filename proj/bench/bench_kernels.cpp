// Serial reference against the OpenMP kernels. Thread count follows
// BILLIARD_LAB_THREADS (default: all cores).
#include <filesystem>
#include <vector>

#include <benchmark/benchmark.h>

#include "billiards/bounds.hpp"
#include "billiards/config.hpp"
#include "billiards/geometry.hpp"
#include "billiards/sweep.hpp"

using namespace billiards;

namespace {

Execution exec_of(const benchmark::State& state) {
  return state.range(0) ? Execution::parallel : Execution::serial;
}

LabConfig shipped(const char* name) {
  return load_config(std::filesystem::path(BILLIARDS_CONFIG_DIR) / name);
}

// the ellipse's bounding disk overlaps the hull of the two circles, so every
// triple goes through the full sampled scan
DeformationFamily scan_table() {
  return DeformationFamily({ObstacleSpec::circle({0}, {0}, {1}),
                            ObstacleSpec::circle({4}, {0}, {1}),
                            ObstacleSpec::ellipse({2}, {2.3}, {1.5}, {0.5}, {0})},
                           0.5, {}, false);
}

void BM_NoEclipse(benchmark::State& state) {
  const DeformationFamily f = scan_table();
  for (auto _ : state)
    benchmark::DoNotOptimize(check_no_eclipse(f, 0.0, 256, 0.0, exec_of(state)));
}
BENCHMARK(BM_NoEclipse)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PhiMax(benchmark::State& state) {
  const LabConfig cfg = shipped("three_circles.cfg");
  const std::vector<Word> none;
  const PhiSampling sampling = cfg.phi_sampling(none);
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_phi_max(cfg.family, 0.0, sampling, exec_of(state)));
}
BENCHMARK(BM_PhiMax)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
  LabConfig cfg = shipped("ellipses.cfg");
  cfg.alpha_grid.count = 9;
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(cfg, exec_of(state)));
}
BENCHMARK(BM_Sweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
