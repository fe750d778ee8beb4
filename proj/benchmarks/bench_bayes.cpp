#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "synth/bayes_model.hpp"
#include "synth/design.hpp"
#include "synth/rng.hpp"

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

void BM_LogPosteriorGradient(benchmark::State& state) {
  const auto design = random_design(static_cast<int>(state.range(0)), 20, 3);
  const synth::BayesModelSpec spec;
  const synth::BayesTarget target(spec, design);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(target.dim(), 0.1);
  Eigen::VectorXd grad(target.dim());
  for (auto _ : state) benchmark::DoNotOptimize(target.log_density(theta, grad));
}

}  // namespace

BENCHMARK(BM_LogPosteriorGradient)->Arg(30)->Arg(100)->Arg(1000);
