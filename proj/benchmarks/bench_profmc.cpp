// Microbenchmarks for the hot paths of a Monte Carlo sweep: contrast
// evaluation, its gradient, the two-sided profile maximization, a full
// replicate, and the threaded sweep driver.
//
// Sizes mirror the mid-range of the experiment grids (n = 4096, p = 16 for
// pointwise costs; smaller n for the whole-replicate paths so a default
// benchmark run finishes quickly).

#include <benchmark/benchmark.h>

#include <cstdint>

#include <Eigen/Core>

#include "profmc/harness.hpp"
#include "profmc/model.hpp"
#include "profmc/optimizer.hpp"
#include "profmc/rng.hpp"
#include "profmc/theory.hpp"

namespace {

profmc::ModelSpec spec_for(profmc::ModelKind kind, int n, int p) {
  switch (kind) {
    case profmc::ModelKind::LatticeBump:
      return profmc::ModelSpec::lattice_bump(n, p);
    case profmc::ModelKind::KernelBump:
      return profmc::ModelSpec::kernel_bump(n, p);
    default:
      return profmc::ModelSpec::gaussian(n, p);
  }
}

profmc::ModelKind kind_for(std::int64_t arg) {
  switch (arg) {
    case 1:
      return profmc::ModelKind::LatticeBump;
    case 2:
      return profmc::ModelKind::KernelBump;
    default:
      return profmc::ModelKind::Gaussian;
  }
}

void set_kind_label(benchmark::State& state, profmc::ModelKind kind) {
  state.SetLabel(profmc::to_string(kind));
}

void BM_ContrastValue(benchmark::State& state) {
  const auto kind = kind_for(state.range(0));
  const auto spec = spec_for(kind, 4096, 16);
  const auto x = profmc::sample_observation(spec, profmc::replicate_seed(1, 4096, 16, 0));
  // Evaluate at the observation itself: an interior point of typical norm
  // where the bump terms are live rather than trivially zero.
  for (auto _ : state) {
    benchmark::DoNotOptimize(profmc::contrast_value(spec, x, x));
  }
  set_kind_label(state, kind);
}

void BM_ContrastGradient(benchmark::State& state) {
  const auto kind = kind_for(state.range(0));
  const auto spec = spec_for(kind, 4096, 16);
  const auto x = profmc::sample_observation(spec, profmc::replicate_seed(1, 4096, 16, 0));
  for (auto _ : state) {
    Eigen::VectorXd g = profmc::contrast_gradient(spec, x, x);
    benchmark::DoNotOptimize(g.data());
  }
  set_kind_label(state, kind);
}

void BM_ProfileResult(benchmark::State& state) {
  const auto kind = kind_for(state.range(0));
  const auto spec = spec_for(kind, 1024, 8);
  const auto x = profmc::sample_observation(spec, profmc::replicate_seed(1, 1024, 8, 0));
  for (auto _ : state) {
    auto result = profmc::profile_result(spec, x);
    benchmark::DoNotOptimize(result.excess);
  }
  set_kind_label(state, kind);
}

void BM_RunReplicate(benchmark::State& state) {
  const auto kind = kind_for(state.range(0));
  const auto spec = spec_for(kind, 1024, 8);
  const auto constants = profmc::default_constants(spec);
  std::int64_t index = 0;
  for (auto _ : state) {
    auto record = profmc::run_replicate(spec, constants, 1, index++);
    benchmark::DoNotOptimize(record.fisher_error);
  }
  set_kind_label(state, kind);
}

void BM_Sweep(benchmark::State& state) {
  profmc::SweepConfig config;
  config.model_kind = profmc::ModelKind::KernelBump;
  config.gamma = 1.0 / 3.0;
  config.c = 1.0;
  config.n_list = {256, 512};
  config.replicates = 32;
  config.master_seed = 1;
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto records = profmc::sweep(config, workers);
    benchmark::DoNotOptimize(records.data());
  }
  state.counters["workers"] = static_cast<double>(workers);
}

BENCHMARK(BM_ContrastValue)->DenseRange(0, 2)->Unit(benchmark::kNanosecond);
BENCHMARK(BM_ContrastGradient)->DenseRange(0, 2)->Unit(benchmark::kNanosecond);
BENCHMARK(BM_ProfileResult)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RunReplicate)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Sweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
