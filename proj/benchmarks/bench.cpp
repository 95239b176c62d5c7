#include <benchmark/benchmark.h>

#include "cprgg/contact.hpp"
#include "cprgg/graph.hpp"
#include "cprgg/percolation.hpp"
#include "cprgg/random.hpp"
#include "cprgg/rgg.hpp"

using namespace cprgg;

// Gillespie events per second on a metastable clique.
static void BM_EngineEvents(benchmark::State& state) {
  const Graph g = build_complete(std::size_t(state.range(0)));
  ContactEngine e(g, 1.0, 7);
  e.reset_full();
  double t = 0.0;
  std::uint64_t events = 0;
  for (auto _ : state) {
    const std::uint64_t before = e.events();
    t += 10.0;
    if (e.advance(t)) {
      e.reset_full();
      t = 0.0;
    }
    events += e.events() - before;
  }
  state.counters["events/s"] = benchmark::Counter(double(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_EngineEvents)->Arg(30)->Arg(200);

static void BM_BuildRgg(benchmark::State& state) {
  GeometryConfig geo{double(state.range(0)), 3.0, 2, Intensity::constant(1.0)};
  const PointCloud cloud = sample_poisson_points(geo, 3);
  for (auto _ : state) benchmark::DoNotOptimize(build_rgg(cloud, geo.radius));
  state.counters["points"] = double(cloud.size());
}
BENCHMARK(BM_BuildRgg)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_LongPath(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const SiteGrid grid = sample_site_grid({n, n}, 0.75, 5);
  std::size_t length = 0;
  for (auto _ : state) length = find_long_open_path(grid).size();
  state.counters["length"] = double(length);
}
BENCHMARK(BM_LongPath)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_OrientedExtinction(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(op_extinction_step(std::size_t(state.range(0)), 0.75, 1000000, replica_seed(9, seed++)));
  }
}
BENCHMARK(BM_OrientedExtinction)->Arg(8)->Arg(16)->Arg(24);

BENCHMARK_MAIN();
