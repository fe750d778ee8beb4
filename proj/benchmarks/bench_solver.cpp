#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "synth/design.hpp"
#include "synth/rng.hpp"
#include "synth/simplex_solver.hpp"

namespace {

synth::DesignPair random_design(int rows, int donors, std::uint64_t seed) {
  synth::Rng rng(seed, 0);
  synth::DesignPair design;
  design.x1.resize(rows);
  design.x0.resize(rows, donors);
  for (int k = 0; k < rows; ++k) {
    design.x1(k) = rng.normal();
    for (int d = 0; d < donors; ++d) design.x0(k, d) = rng.normal();
  }
  design.v = Eigen::VectorXd::Constant(rows, 1.0 / rows);
  return design;
}

void BM_SolveSc(benchmark::State& state) {
  const auto design = random_design(static_cast<int>(state.range(0)),
                                    static_cast<int>(state.range(1)), 7);
  for (auto _ : state) {
    auto fit = synth::solve_sc(design);
    benchmark::DoNotOptimize(fit.objective);
  }
}

}  // namespace

BENCHMARK(BM_SolveSc)->Args({30, 20})->Args({100, 20})->Args({1000, 20})->Args({100, 50});
