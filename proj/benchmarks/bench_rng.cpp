#include <benchmark/benchmark.h>

#include "synth/rng.hpp"

namespace {

void BM_PhiloxU64(benchmark::State& state) {
  synth::Rng rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.next_u64());
}

void BM_Normal(benchmark::State& state) {
  synth::Rng rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
}

}  // namespace

BENCHMARK(BM_PhiloxU64);
BENCHMARK(BM_Normal);
