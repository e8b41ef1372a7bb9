#include <benchmark/benchmark.h>
#include <chainprofiler/tornado.hpp>

#include "generators.hpp"

using namespace chainprofiler;

static void BM_AllHeuristics(benchmark::State& state) {
  Rng rng(5);
  const auto log = gen::mixer_log(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tornado::all_heuristics(log.events, log.corpus));
  state.counters["events"] = static_cast<double>(log.events.size());
}
BENCHMARK(BM_AllHeuristics)->Arg(200)->Arg(2000);
