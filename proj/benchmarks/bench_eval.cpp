#include <benchmark/benchmark.h>
#include <chainprofiler/eval.hpp>

#include "generators.hpp"

using namespace chainprofiler;

static eval::FeatureMap features(std::size_t n, std::size_t dim) {
  Rng rng(1);
  eval::FeatureMap out;
  for (const auto& a : gen::addresses(n)) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.uniform();
    out[a] = std::move(v);
  }
  return out;
}

static void BM_OrderCandidates(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto f = features(n, 128);
  const auto who = gen::addresses(n);
  const std::vector<Address> cands(who.begin() + 1, who.end());
  for (auto _ : state) benchmark::DoNotOptimize(eval::order_candidates(f, who[0], cands));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_OrderCandidates)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

static void BM_EntropyGain(benchmark::State& state) {
  Rng rng(2);
  std::vector<eval::RankedResult> rs;
  for (int i = 0; i < 10'000; ++i) {
    eval::RankedResult r;
    r.n = 1 + rng.index(2000);
    r.rank = 1 + rng.index(r.n);
    rs.push_back(r);
  }
  const auto m = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(eval::entropy_gain(rs, m));
}
BENCHMARK(BM_EntropyGain)->Arg(100)->Arg(1000);
