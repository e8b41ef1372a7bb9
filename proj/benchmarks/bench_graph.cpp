#include <benchmark/benchmark.h>
#include <chainprofiler/embeddings.hpp>
#include <chainprofiler/txgraph.hpp>

#include "generators.hpp"

using namespace chainprofiler;

static txgraph::TransactionGraph random_graph(std::size_t n) {
  Rng rng(3);
  return txgraph::preprocess(gen::graph(rng, n, 8.0 / static_cast<double>(n))).graph;
}

static void BM_Preprocess(benchmark::State& state) {
  Rng rng(4);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = gen::graph(rng, n, 6.0 / static_cast<double>(n));
  for (auto _ : state) benchmark::DoNotOptimize(txgraph::preprocess(g));
}
BENCHMARK(BM_Preprocess)->Arg(1000)->Arg(4000);

static void BM_DiffusionWalks(benchmark::State& state) {
  const auto g = random_graph(static_cast<std::size_t>(state.range(0)));
  embeddings::WalkParams p;
  for (auto _ : state) benchmark::DoNotOptimize(embeddings::generate_diffusion_sequences(g, p));
}
BENCHMARK(BM_DiffusionWalks)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_Embed(benchmark::State& state) {
  const auto g = random_graph(500);
  embeddings::WalkParams p;
  p.dim = 64;
  p.epochs = 1;
  p.workers = static_cast<int>(state.range(1));
  const auto method = state.range(0) == 0 ? embeddings::Method::diff2vec : embeddings::Method::role2vec;
  for (auto _ : state) benchmark::DoNotOptimize(embeddings::embed_graph(g, method, p));
}
BENCHMARK(BM_Embed)->Args({0, 1})->Args({0, 4})->Args({1, 1})->Unit(benchmark::kMillisecond);
