#include <benchmark/benchmark.h>
#include <chainprofiler/fingerprint.hpp>

#include "generators.hpp"

using namespace chainprofiler;

static void BM_SurvivalIntegral(benchmark::State& state) {
  const double p = static_cast<double>(state.range(0)) / 1000.0;
  for (auto _ : state) benchmark::DoNotOptimize(fingerprint::survival_probability_integral(p, 1.91));
}
BENCHMARK(BM_SurvivalIntegral)->Arg(1)->Arg(310)->Arg(900);

static void BM_ReplayAndRate(benchmark::State& state) {
  Rng rng(6);
  const auto pool = gen::addresses(200);
  const auto txs = gen::corpus(rng, static_cast<std::size_t>(state.range(0)), pool);
  for (auto _ : state) {
    const auto ledger = fingerprint::replay_balances(txs);
    benchmark::DoNotOptimize(fingerprint::fingerprint_change_rate(ledger, 9, std::nullopt));
  }
}
BENCHMARK(BM_ReplayAndRate)->Arg(10'000);
