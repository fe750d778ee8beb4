#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "synth/design.hpp"
#include "synth/effects.hpp"
#include "synth/errors.hpp"
#include "synth/factor_model.hpp"
#include "synth/mle.hpp"
#include "synth/panel.hpp"
#include "synth/rng.hpp"
#include "synth/simplex_solver.hpp"
#include "synth/stats.hpp"

using synth::Panel;

namespace {

Panel panel_from(const Eigen::MatrixXd& outcomes, int t0) {
  Panel panel;
  const int units = static_cast<int>(outcomes.cols());
  panel.units.emplace_back("treated");
  for (int u = 1; u < units; ++u) panel.units.push_back("d" + std::to_string(u));
  for (int t = 1; t <= outcomes.rows(); ++t) panel.times.push_back(std::to_string(t));
  panel.outcomes = outcomes;
  panel.t0 = t0;
  return panel;
}

}  // namespace

TEST_CASE("noiseless linear relation is recovered exactly") {
  synth::Rng rng(3, 0);
  Eigen::MatrixXd outcomes(12, 3);
  for (int t = 0; t < 12; ++t) {
    outcomes(t, 1) = rng.normal();
    outcomes(t, 2) = rng.normal();
    outcomes(t, 0) = 0.4 * outcomes(t, 1) + 0.6 * outcomes(t, 2);
  }
  const auto fit = synth::fit_mle(panel_from(outcomes, 10));
  CHECK(fit.w_hat(0) == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(fit.w_hat(1) == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(fit.sigma_sq_hat < 1e-20);
}

TEST_CASE("insufficient pre-period and rank deficiency raise dedicated errors") {
  Eigen::MatrixXd outcomes = Eigen::MatrixXd::Random(6, 5);
  CHECK_THROWS_AS(synth::fit_mle(panel_from(outcomes, 3)),
                  synth::InsufficientDataError);

  Eigen::MatrixXd collinear(10, 3);
  synth::Rng rng(4, 0);
  for (int t = 0; t < 10; ++t) {
    collinear(t, 1) = rng.normal();
    collinear(t, 2) = 2.0 * collinear(t, 1);
    collinear(t, 0) = rng.normal();
  }
  CHECK_THROWS_AS(synth::fit_mle(panel_from(collinear, 8)), synth::RankError);
}

TEST_CASE("donor relabeling permutes the estimate") {
  synth::Rng rng(6, 0);
  Eigen::MatrixXd outcomes(30, 4);
  for (int t = 0; t < 30; ++t)
    for (int u = 0; u < 4; ++u) outcomes(t, u) = rng.normal();
  const auto fit = synth::fit_mle(panel_from(outcomes, 25));

  Eigen::MatrixXd swapped = outcomes;
  swapped.col(1).swap(swapped.col(3));
  const auto fit_swapped = synth::fit_mle(panel_from(swapped, 25));
  CHECK(fit_swapped.w_hat(0) == doctest::Approx(fit.w_hat(2)).epsilon(1e-12));
  CHECK(fit_swapped.w_hat(2) == doctest::Approx(fit.w_hat(0)).epsilon(1e-12));
  CHECK(fit_swapped.w_hat(1) == doctest::Approx(fit.w_hat(1)).epsilon(1e-12));
  CHECK(fit_swapped.sigma_sq_hat == doctest::Approx(fit.sigma_sq_hat).epsilon(1e-12));
}

TEST_CASE("MLE approaches the conditional weights at large T0") {
  synth::FactorSpec spec;
  spec.lambda1 = 1.3;
  spec.lambdas.resize(3);
  spec.lambdas << 1.0, 0.6, 1.4;
  spec.sigma_f = 1.0;
  const int t0 = 10000;
  const auto panel = synth::simulate_single_factor(spec, t0 + 5, t0, 808);
  const auto fit = synth::fit_mle(panel);
  const auto w_star = synth::conditional_weights(spec);
  // standard error per coordinate is about sqrt(Sigma~ / t0) ~ 0.015
  CHECK((fit.w_hat - w_star).cwiseAbs().maxCoeff() < 0.06);
  CHECK(fit.sigma_sq_hat ==
        doctest::Approx(synth::conditional_variance(spec)).epsilon(0.05));
}

TEST_CASE("grouped DGP: weight on the matching donor, error decreasing in T0") {
  const std::vector<int> grid = {30, 100, 500, 1000};
  const int seeds = 200;
  std::vector<std::vector<double>> errors(grid.size());
  for (int s = 0; s < seeds; ++s) {
    const Panel master = synth::simulate_grouped(20, 1, 0.5, 0.25, 1001, 1000,
                                                 9000 + s);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const Panel window = synth::tail_slice(master, grid[g], 1);
      const auto fit = synth::fit_mle(window);
      Eigen::VectorXd e2 = Eigen::VectorXd::Zero(20);
      e2(0) = 1.0;
      errors[g].push_back((fit.w_hat - e2).norm());
    }
  }
  std::vector<double> medians;
  for (auto& column : errors) medians.push_back(synth::stats::median(column));
  for (std::size_t g = 1; g < medians.size(); ++g) CHECK(medians[g] < medians[g - 1]);
  CHECK(medians.back() < 0.15);  // w2 near 1 at T0 = 1000
}

TEST_CASE("in-sample loss of the MLE is no worse than the simplex fit") {
  synth::FactorSpec spec;
  spec.lambda1 = 1.0;
  spec.lambdas.resize(4);
  spec.lambdas << 0.8, 1.1, 0.9, 1.2;
  spec.sigma_f = 1.0;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto panel = synth::simulate_single_factor(spec, 120, 100, seed);
    const auto mle = synth::fit_mle(panel);
    const auto simplex = synth::solve_sc(synth::outcomes_design(panel));
    const Eigen::VectorXd y1 = panel.outcomes.col(0).head(100);
    const Eigen::MatrixXd yj = panel.outcomes.topRows(100).rightCols(4);
    const double loss_mle = (y1 - yj * mle.w_hat).squaredNorm();
    const double loss_sc = (y1 - yj * simplex.w).squaredNorm();
    CHECK(loss_mle <= loss_sc + 1e-9);
  }
}

TEST_CASE("rate probe: median squared error scales like J/T0") {
  const std::vector<int> t0_grid = {250, 1000, 4000};
  std::vector<double> log_ratio, log_med;
  for (int t0 : t0_grid) {
    const int j = static_cast<int>(std::floor(std::cbrt(static_cast<double>(t0))));
    synth::FactorSpec spec;
    spec.lambda1 = 1.0;
    spec.lambdas = Eigen::VectorXd::Ones(j);
    spec.sigma_f = 1.0;
    const Eigen::VectorXd w_star = synth::conditional_weights(spec);
    std::vector<double> sq_errors;
    for (int rep = 0; rep < 60; ++rep) {
      const auto panel = synth::simulate_single_factor(
          spec, t0 + 2, t0, 40000 + 100 * t0 + rep);
      const auto fit = synth::fit_mle(panel);
      sq_errors.push_back((fit.w_hat - w_star).squaredNorm());
    }
    log_ratio.push_back(std::log(static_cast<double>(j) / t0));
    log_med.push_back(std::log(synth::stats::median(sq_errors)));
  }
  const double slope = synth::stats::ols_slope(log_ratio, log_med);
  CHECK(slope == doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("effects: identical donor, additive shift, hand computation") {
  synth::Rng rng(21, 0);
  Eigen::MatrixXd outcomes(8, 3);
  for (int t = 0; t < 8; ++t)
    for (int u = 0; u < 3; ++u) outcomes(t, u) = rng.normal();
  outcomes.col(0) = outcomes.col(2);  // treated equals donor 2
  Eigen::VectorXd e2(2);
  e2 << 0.0, 1.0;
  const auto zero = synth::effects(panel_from(outcomes, 5), e2);
  CHECK(zero.taus.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.mean_effect == 0.0);

  // constant shift after t0 only
  Eigen::MatrixXd shifted = outcomes;
  for (int t = 5; t < 8; ++t) shifted(t, 0) += 2.5;
  const auto shift = synth::effects(panel_from(shifted, 5), e2);
  CHECK(shift.taus.minCoeff() == doctest::Approx(2.5));
  CHECK(shift.taus.maxCoeff() == doctest::Approx(2.5));
  CHECK(shift.mean_effect == doctest::Approx(2.5));

  // arbitrary weights vs direct dot products
  Eigen::VectorXd w(2);
  w << 0.25, 0.6;
  const auto series = synth::effects(panel_from(outcomes, 5), w);
  for (int t = 0; t < 3; ++t) {
    const double expected = outcomes(5 + t, 0) -
                            (0.25 * outcomes(5 + t, 1) + 0.6 * outcomes(5 + t, 2));
    CHECK(series.taus(t) == doctest::Approx(expected).epsilon(1e-14));
  }
  CHECK(series.periods.size() == 3);
}

TEST_CASE("wald interval: quantile, degenerate contrast, error paths") {
  synth::MleFit fit;
  fit.w_hat = Eigen::VectorXd::Zero(2);
  fit.w_hat << 0.3, 0.7;
  fit.vcov = Eigen::MatrixXd::Identity(2, 2);
  fit.sigma_sq_hat = 1.0;
  fit.t0 = 100;

  Eigen::VectorXd alpha(2);
  alpha << 1.0, 0.0;
  const auto [lo, hi] = synth::wald_interval(fit, alpha, 0.95);
  const double s = std::sqrt(1.0 / 100.0);
  CHECK(hi - lo == doctest::Approx(2.0 * 1.959964 * s).epsilon(1e-6));
  CHECK(0.5 * (lo + hi) == doctest::Approx(0.3));

  const auto [zlo, zhi] = synth::wald_interval(fit, Eigen::VectorXd::Zero(2), 0.95);
  CHECK(zlo == 0.0);
  CHECK(zhi == 0.0);

  CHECK_THROWS_AS(synth::wald_interval(fit, alpha, 1.5), synth::ConfigError);
  fit.vcov(0, 0) = -4.0;
  CHECK_THROWS_AS(synth::wald_interval(fit, alpha, 0.95), synth::NumericalError);
}
