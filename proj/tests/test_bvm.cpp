#include <doctest.h>

#include <cmath>

#include "synth/bvm.hpp"
#include "synth/errors.hpp"

using synth::BvmConfig;
using synth::BvmDesign;

namespace {

BvmConfig smoke_config() {
  BvmConfig config;
  config.design = BvmDesign::sparse;
  config.t0_grid = {30};
  config.freq_reps = 100;
  config.bayes.chains = 2;
  config.bayes.warmup = 150;
  config.bayes.draws = 150;
  config.seed = 5;
  config.threads = 2;
  config.grid_points = 201;
  return config;
}

}  // namespace

TEST_CASE("config validation") {
  BvmConfig config = smoke_config();
  config.t0_grid = {};
  CHECK_THROWS_AS(config.validate(), synth::ConfigError);
  config.t0_grid = {100, 30};
  CHECK_THROWS_AS(config.validate(), synth::ConfigError);
  config.t0_grid = {30};
  config.freq_reps = 10;
  CHECK_THROWS_AS(config.validate(), synth::ConfigError);
}

TEST_CASE("smoke run produces a coherent report") {
  const auto report = synth::run_bvm(smoke_config());
  REQUIRE(report.entries.size() == 1);
  const auto& entry = report.entries[0];
  CHECK(entry.t0 == 30);
  CHECK(entry.freq_tau_samples.size() == 100);
  CHECK(entry.bayes_tau_draws.size() == 300);
  CHECK(entry.tv >= 0.0);
  CHECK(entry.tv <= 1.0);
  CHECK(entry.freq_failures == 0);
  CHECK(report.true_weights(0) == 1.0);
  CHECK(entry.posterior_mean_w.size() == 20);

  double integral = 0.0;
  for (int i = 1; i < entry.freq_density.grid.size(); ++i)
    integral += 0.5 * (entry.freq_density.values(i) + entry.freq_density.values(i - 1)) *
                (entry.freq_density.grid(i) - entry.freq_density.grid(i - 1));
  CHECK(integral == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("identical config and seed give identical reports") {
  const auto a = synth::run_bvm(smoke_config());
  const auto b = synth::run_bvm(smoke_config());
  CHECK(a.entries[0].tv == b.entries[0].tv);
  CHECK(a.entries[0].freq_tau_samples == b.entries[0].freq_tau_samples);
  CHECK(a.entries[0].bayes_tau_draws == b.entries[0].bayes_tau_draws);

  auto c = smoke_config();
  c.threads = 1;
  const auto serial = synth::run_bvm(c);
  CHECK(serial.entries[0].tv == a.entries[0].tv);
}

TEST_CASE("dense design uses uniform weight over the matching group") {
  auto config = smoke_config();
  config.design = BvmDesign::dense;
  const auto report = synth::run_bvm(config);
  CHECK(report.true_weights.head(5).sum() == doctest::Approx(1.0));
  CHECK(report.true_weights(0) == doctest::Approx(0.2));
  CHECK(report.true_weights.tail(15).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scaling the outcomes scales the densities but not the tv") {
  auto base = smoke_config();
  base.freq_reps = 100;
  const auto a = synth::run_bvm(base);
  auto scaled = base;
  scaled.outcome_scale = 3.0;
  const auto b = synth::run_bvm(scaled);
  CHECK(b.entries[0].tv == doctest::Approx(a.entries[0].tv).epsilon(1e-6));
  // support scales by 3
  CHECK(b.entries[0].freq_density.grid(0) ==
        doctest::Approx(3.0 * a.entries[0].freq_density.grid(0)).epsilon(1e-9));
}

TEST_CASE("noise-free replication collapses the posterior onto donor 1") {
  auto config = smoke_config();
  config.noise_sd = 0.0;
  config.t0_grid = {100};
  config.bayes.warmup = 300;
  config.bayes.draws = 300;
  const auto report = synth::weight_recovery_report(config);
  REQUIRE(report.entries.size() == 1);
  CHECK(report.entries[0].distance < 0.05);
  CHECK(report.entries[0].posterior_mean(0) > 0.95);
}

TEST_CASE("weight recovery report matches run_bvm posterior means") {
  const auto config = smoke_config();
  const auto bvm = synth::run_bvm(config);
  const auto recovery = synth::weight_recovery_report(config);
  CHECK(recovery.entries[0].posterior_mean.isApprox(bvm.entries[0].posterior_mean_w, 1e-12));
  CHECK(recovery.entries[0].weight_densities.size() == 20);
}
