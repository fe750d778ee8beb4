#include "synth/bvm.hpp"

#include <algorithm>
#include <cmath>

#include "synth/effects.hpp"
#include "synth/errors.hpp"
#include "synth/factor_model.hpp"
#include "synth/parallel.hpp"
#include "synth/rng.hpp"
#include "synth/simplex_solver.hpp"

namespace synth {

namespace {

constexpr std::uint64_t kFreqTag = 0x66726571;   // replication panels
constexpr std::uint64_t kBayesTag = 0x62617965;  // the single Bayesian panel

struct DesignShape {
  int groups;
  int group_size;
};

DesignShape shape_of(BvmDesign design) {
  return design == BvmDesign::sparse ? DesignShape{20, 1} : DesignShape{4, 5};
}

Eigen::VectorXd true_representation(BvmDesign design) {
  const auto shape = shape_of(design);
  const int j = shape.groups * shape.group_size;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(j);
  for (int d = 0; d < shape.group_size; ++d)
    w(d) = 1.0 / static_cast<double>(shape.group_size);
  return w;
}

Panel simulate_master(const BvmConfig& config, std::uint64_t stream) {
  const auto shape = shape_of(config.design);
  const int t_total = config.t0_grid.back() + config.post_periods;
  Panel panel = simulate_grouped(shape.groups, shape.group_size, config.rho,
                                 config.noise_sd, t_total,
                                 config.t0_grid.back(), stream);
  if (config.outcome_scale != 1.0) panel.outcomes *= config.outcome_scale;
  return panel;
}

}  // namespace

void BvmConfig::validate() const {
  if (t0_grid.empty()) throw ConfigError("t0_grid must not be empty");
  if (!std::is_sorted(t0_grid.begin(), t0_grid.end()) ||
      std::adjacent_find(t0_grid.begin(), t0_grid.end()) != t0_grid.end())
    throw ConfigError("t0_grid must be strictly ascending");
  if (t0_grid.front() < 2) throw ConfigError("t0 values must be at least 2");
  if (post_periods < 1) throw ConfigError("post_periods must be positive");
  if (freq_reps < 100) throw ConfigError("freq_reps must be at least 100");
  if (!(noise_sd >= 0.0)) throw ConfigError("noise_sd must be nonnegative");
  if (!(std::abs(rho) < 1.0)) throw ConfigError("rho must lie in (-1, 1)");
  if (!(outcome_scale > 0.0)) throw ConfigError("outcome_scale must be positive");
}

BvmReport run_bvm(const BvmConfig& config) {
  config.validate();
  const int num_t0 = static_cast<int>(config.t0_grid.size());
  const int reps = config.freq_reps;

  // Frequentist side: per replication one long panel, one estimate per t0
  // from its trailing window.
  std::vector<std::vector<double>> taus(num_t0,
                                        std::vector<double>(reps, 0.0));
  std::vector<std::vector<char>> failed(num_t0, std::vector<char>(reps, 0));
  parallel_for(static_cast<std::size_t>(reps), config.threads, [&](std::size_t r) {
    const Panel master =
        simulate_master(config, derive_stream(config.seed + kFreqTag, r));
    for (int g = 0; g < num_t0; ++g) {
      const Panel window = tail_slice(master, config.t0_grid[g], config.post_periods);
      try {
        const SimplexWeights fit = solve_sc(outcomes_design(window));
        taus[g][r] = effects(window, fit.w).mean_effect;
      } catch (const SolverError&) {
        failed[g][r] = 1;
      } catch (const NumericalError&) {
        failed[g][r] = 1;
      }
    }
  });

  // Bayesian side: one further panel, fit per t0 on its trailing window.
  const Panel bayes_master =
      simulate_master(config, derive_stream(config.seed + kBayesTag, 0));

  BvmReport report;
  report.true_weights = true_representation(config.design);

  for (int g = 0; g < num_t0; ++g) {
    BvmEntry entry;
    entry.t0 = config.t0_grid[g];

    entry.freq_tau_samples.reserve(reps);
    for (int r = 0; r < reps; ++r) {
      if (failed[g][r])
        ++entry.freq_failures;
      else
        entry.freq_tau_samples.push_back(taus[g][r]);
    }
    if (entry.freq_failures > reps / 100)
      throw ExperimentError("more than 1% of replications failed at t0 = " +
                            std::to_string(entry.t0));

    const Panel window = tail_slice(bayes_master, entry.t0, config.post_periods);
    BayesModelSpec model;
    model.include_predictive_noise = config.predictive_noise;
    SamplerConfig sampler = config.bayes;
    sampler.threads = config.threads;
    const PosteriorDraws draws =
        sample(model, window, outcomes_design(window), sampler,
               derive_stream(config.seed + kBayesTag, 1 + static_cast<std::uint64_t>(g)));

    entry.bayes_tau_draws.resize(draws.num_draws());
    for (int m = 0; m < draws.num_draws(); ++m)
      entry.bayes_tau_draws[m] = draws.mean_effect(m);
    entry.posterior_mean_w = draws.w_draws.colwise().mean();
    entry.recovery_distance = (entry.posterior_mean_w - report.true_weights).norm();

    entry.freq_density = kde(entry.freq_tau_samples, config.grid_points);
    entry.bayes_density = kde(entry.bayes_tau_draws, config.grid_points);
    entry.tv = tv_distance(entry.freq_density, entry.bayes_density);
    report.entries.push_back(std::move(entry));
  }

  report.recovery_monotone = true;
  for (std::size_t g = 1; g < report.entries.size(); ++g)
    if (!(report.entries[g].recovery_distance <
          report.entries[g - 1].recovery_distance))
      report.recovery_monotone = false;
  return report;
}

WeightRecoveryReport weight_recovery_report(const BvmConfig& config) {
  config.validate();
  const Panel bayes_master =
      simulate_master(config, derive_stream(config.seed + kBayesTag, 0));

  WeightRecoveryReport report;
  report.true_weights = true_representation(config.design);

  for (std::size_t g = 0; g < config.t0_grid.size(); ++g) {
    WeightRecoveryEntry entry;
    entry.t0 = config.t0_grid[g];
    const Panel window = tail_slice(bayes_master, entry.t0, config.post_periods);
    BayesModelSpec model;
    model.include_predictive_noise = config.predictive_noise;
    SamplerConfig sampler = config.bayes;
    sampler.threads = config.threads;
    const PosteriorDraws draws =
        sample(model, window, outcomes_design(window), sampler,
               derive_stream(config.seed + kBayesTag, 1 + static_cast<std::uint64_t>(g)));

    entry.posterior_mean = draws.w_draws.colwise().mean();
    entry.distance = (entry.posterior_mean - report.true_weights).norm();
    entry.weight_densities.reserve(draws.num_donors());
    std::vector<double> column(draws.num_draws());
    for (int d = 0; d < draws.num_donors(); ++d) {
      for (int m = 0; m < draws.num_draws(); ++m) column[m] = draws.w_draws(m, d);
      entry.weight_densities.push_back(kde(column, config.grid_points));
    }
    report.entries.push_back(std::move(entry));
  }

  report.monotone_decreasing = true;
  for (std::size_t g = 1; g < report.entries.size(); ++g)
    if (!(report.entries[g].distance < report.entries[g - 1].distance))
      report.monotone_decreasing = false;
  return report;
}

}  // namespace synth
