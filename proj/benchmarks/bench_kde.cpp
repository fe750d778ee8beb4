#include <benchmark/benchmark.h>

#include <vector>

#include "synth/kde.hpp"
#include "synth/rng.hpp"

namespace {

void BM_Kde(benchmark::State& state) {
  synth::Rng rng(5, 0);
  std::vector<double> samples(state.range(0));
  for (auto& x : samples) x = rng.normal();
  for (auto _ : state) {
    auto density = synth::kde(samples, 512);
    benchmark::DoNotOptimize(density.bandwidth);
  }
}

}  // namespace

BENCHMARK(BM_Kde)->Arg(2000)->Arg(10000);
