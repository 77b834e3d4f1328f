#include <benchmark/benchmark.h>

#include <vector>

#include "apsim/kmc.hpp"
#include "apsim/queueing.hpp"
#include "apsim/sde.hpp"

namespace {

void BM_KmcStep(benchmark::State& state) {
  const apsim::LatticeGeometry geometry(60, 20);
  apsim::Rng rng(7, 0);
  apsim::KmcParams params;
  params.drift = 0.2;
  params.stop = apsim::StopRule::AtTime;
  for (auto _ : state) {
    state.PauseTiming();
    auto config = apsim::random_configuration(geometry, 1200, 1200, rng);
    apsim::MoveTable table(config, params);
    double now = 0.0;
    state.ResumeTiming();
    for (int i = 0; i < 10000; ++i) {
      auto step = apsim::kmc_step(config, table, rng, now);
      now = step->event.time;
    }
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_KmcStep);

void BM_MoveTableBuild(benchmark::State& state) {
  const apsim::LatticeGeometry geometry(60, 20);
  apsim::Rng rng(7, 1);
  const auto config = apsim::random_configuration(geometry, 1200, 1200, rng);
  apsim::KmcParams params;
  params.drift = 0.2;
  for (auto _ : state) benchmark::DoNotOptimize(apsim::MoveTable(config, params).total_rate());
}
BENCHMARK(BM_MoveTableBuild);

void BM_SkorokhodMap(benchmark::State& state) {
  apsim::Rng rng(7, 2);
  std::vector<double> y(static_cast<std::size_t>(state.range(0)));
  double level = 0.0;
  for (auto& v : y) v = (level += rng.normal());
  y.front() = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(apsim::skorokhod_map(y, 0.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SkorokhodMap)->Arg(1000)->Arg(100000);

void BM_ReflectedOu(benchmark::State& state) {
  apsim::OuParams p{1.2, 10.0, 0.3, 0.5, 0.5};
  for (auto _ : state) {
    apsim::Rng rng(7, 3);
    benchmark::DoNotOptimize(apsim::reflected_ou(p, 1e-3, 100000, rng));
  }
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_ReflectedOu);

void BM_QueueSimulation(benchmark::State& state) {
  const apsim::QueueParams p{1.0, 1.0, 2, 5, 1e4, 0};
  for (auto _ : state) {
    apsim::Rng rng(7, 4);
    benchmark::DoNotOptimize(apsim::simulate_queue(p, rng));
  }
}
BENCHMARK(BM_QueueSimulation);

}  // namespace

BENCHMARK_MAIN();
