#include "synth/factor_model.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "synth/errors.hpp"
#include "synth/parallel.hpp"
#include "synth/rng.hpp"

namespace synth {

void FactorSpec::validate() const {
  if (num_donors() < 1) throw ConfigError("factor spec needs at least one donor loading");
  if (!(sigma_f > 0.0) || !std::isfinite(sigma_f))
    throw ConfigError("sigma_f must be positive and finite");
  if (!(noise_sd > 0.0) || !std::isfinite(noise_sd))
    throw ConfigError("noise_sd must be positive and finite");
  if (!std::isfinite(lambda1) || !lambdas.allFinite())
    throw ConfigError("loadings must be finite");
  if (law == FactorLaw::ar1 && !(std::abs(rho) < 1.0))
    throw ConfigError("rho must lie in (-1, 1)");
}

namespace {

void require_iid(const FactorSpec& spec, const char* op) {
  if (spec.law != FactorLaw::iid_gaussian)
    throw ConfigError(std::string(op) + " requires the iid Gaussian factor law");
}

}  // namespace

Eigen::VectorXd conditional_weights(const FactorSpec& spec) {
  spec.validate();
  require_iid(spec, "conditional_weights");
  const double s2 = spec.sigma_f * spec.sigma_f;
  const double n2 = spec.noise_sd * spec.noise_sd;
  const double denom = n2 + s2 * spec.lambdas.squaredNorm();
  return (s2 * spec.lambda1 / denom) * spec.lambdas;
}

double conditional_variance(const FactorSpec& spec) {
  spec.validate();
  require_iid(spec, "conditional_variance");
  const double s2 = spec.sigma_f * spec.sigma_f;
  const double n2 = spec.noise_sd * spec.noise_sd;
  const double norm2 = spec.lambdas.squaredNorm();
  const double l1sq = spec.lambda1 * spec.lambda1;
  return n2 + l1sq * s2 - s2 * s2 * l1sq * norm2 / (n2 + s2 * norm2);
}

CharacterizationReport check_characterization(const FactorSpec& spec, double tol) {
  spec.validate();
  require_iid(spec, "check_characterization");
  const double s2 = spec.sigma_f * spec.sigma_f;
  const double n2 = spec.noise_sd * spec.noise_sd;

  CharacterizationReport report;
  report.sign_ok = true;
  for (int j = 0; j < spec.num_donors(); ++j)
    if (spec.lambda1 * spec.lambdas(j) < 0.0) report.sign_ok = false;

  report.sphere_residual = spec.lambdas.squaredNorm() -
                           spec.lambda1 * spec.lambdas.sum() + n2 / s2;

  const Eigen::VectorXd w = conditional_weights(spec);
  report.in_simplex =
      (w.array() >= -tol).all() && std::abs(w.sum() - 1.0) <= tol;
  return report;
}

Panel simulate_single_factor(const FactorSpec& spec, int t_total, int t0,
                             std::uint64_t seed) {
  spec.validate();
  require_iid(spec, "simulate_single_factor");
  if (t0 < 2 || t0 >= t_total)
    throw ConfigError("simulate_single_factor needs 2 <= t0 < t_total");

  const int j = spec.num_donors();
  Panel panel;
  panel.units.reserve(j + 1);
  panel.units.emplace_back("treated");
  for (int d = 1; d <= j; ++d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "donor%02d", d);
    panel.units.emplace_back(buf);
  }
  panel.times.reserve(t_total);
  for (int t = 1; t <= t_total; ++t) panel.times.push_back(std::to_string(t));
  panel.t0 = t0;

  Rng factor_rng(seed, 0);
  Rng noise_rng(seed, 1);
  Eigen::VectorXd factor(t_total);
  for (int t = 0; t < t_total; ++t) factor(t) = factor_rng.normal(0.0, spec.sigma_f);

  panel.outcomes.resize(t_total, j + 1);
  for (int col = 0; col <= j; ++col) {
    const double loading = (col == 0) ? spec.lambda1 : spec.lambdas(col - 1);
    for (int t = 0; t < t_total; ++t)
      panel.outcomes(t, col) = loading * factor(t) + noise_rng.normal(0.0, spec.noise_sd);
  }
  panel.validate();
  return panel;
}

Panel simulate_grouped(int groups, int group_size, double rho, double noise_sd,
                       int t_total, int t0, std::uint64_t seed) {
  if (groups < 1 || group_size < 1)
    throw ConfigError("simulate_grouped needs groups >= 1 and group_size >= 1");
  if (!(std::abs(rho) < 1.0)) throw ConfigError("rho must lie in (-1, 1)");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd))
    throw ConfigError("noise_sd must be nonnegative and finite");
  if (t0 < 2 || t0 >= t_total)
    throw ConfigError("simulate_grouped needs 2 <= t0 < t_total");

  const int j = groups * group_size;
  Panel panel;
  panel.units.reserve(j + 1);
  panel.units.emplace_back("treated");
  for (int d = 1; d <= j; ++d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "donor%02d", d);
    panel.units.emplace_back(buf);
  }
  panel.times.reserve(t_total);
  for (int t = 1; t <= t_total; ++t) panel.times.push_back(std::to_string(t));
  panel.t0 = t0;

  // Stationary AR(1) loading path per group.
  Rng path_rng(seed, 0);
  Eigen::MatrixXd loading(t_total, groups);
  const double init_sd = 1.0 / std::sqrt(1.0 - rho * rho);
  for (int g = 0; g < groups; ++g) {
    loading(0, g) = path_rng.normal(0.0, init_sd);
    for (int t = 1; t < t_total; ++t)
      loading(t, g) = rho * loading(t - 1, g) + path_rng.normal();
  }

  Rng noise_rng(seed, 1);
  panel.outcomes.resize(t_total, j + 1);
  for (int col = 0; col <= j; ++col) {
    const int group = (col == 0) ? 0 : (col - 1) / group_size;
    for (int t = 0; t < t_total; ++t)
      panel.outcomes(t, col) =
          loading(t, group) + (noise_sd > 0.0 ? noise_rng.normal(0.0, noise_sd) : 0.0);
  }
  panel.validate();
  return panel;
}

std::vector<ConvergenceRow> predictor_convergence_experiment(
    const std::function<Eigen::VectorXd(int)>& lambda_rule,
    const std::vector<int>& j_grid, double sigma, int reps, std::uint64_t seed,
    double lambda1, unsigned threads) {
  if (j_grid.empty()) throw ConfigError("j_grid must not be empty");
  if (reps < 1) throw ConfigError("reps must be positive");
  if (!(sigma >= 0.0)) throw ConfigError("sigma must be nonnegative");

  std::vector<ConvergenceRow> rows(j_grid.size());
  for (std::size_t g = 0; g < j_grid.size(); ++g) {
    const int j = j_grid[g];
    const Eigen::VectorXd lambdas = lambda_rule(j);
    if (lambdas.size() != j)
      throw ConfigError("lambda_rule returned wrong number of loadings");
    const double s2 = sigma * sigma;
    const double denom = 1.0 + s2 * lambdas.squaredNorm();
    const Eigen::VectorXd w = (s2 * lambda1 / denom) * lambdas;

    const std::uint64_t grid_stream = derive_stream(seed, g);
    std::vector<double> errors(reps);
    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
      Rng rng(seed, derive_stream(grid_stream, r));
      const double f = sigma > 0.0 ? rng.normal(0.0, sigma) : 0.0;
      double pred = 0.0;
      for (int d = 0; d < j; ++d) pred += w(d) * (lambdas(d) * f + rng.normal());
      errors[r] = std::abs(pred - lambda1 * f);
    });

    double total = 0.0;
    for (double e : errors) total += e;
    rows[g] = {j, total / static_cast<double>(reps)};
  }
  return rows;
}

void write_convergence_report(const std::vector<ConvergenceRow>& rows,
                              const std::string& rule_name, double sigma,
                              int reps, std::uint64_t seed,
                              const std::string& csv_path,
                              const std::string& json_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw ConfigError("cannot open " + csv_path);
  csv << "j,mean_abs_error\n";
  for (const auto& row : rows) csv << row.j << ',' << row.mean_abs_error << '\n';

  nlohmann::json sidecar;
  sidecar["rule"] = rule_name;
  sidecar["sigma"] = sigma;
  sidecar["reps"] = reps;
  sidecar["seed"] = seed;
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& row : rows) grid.push_back(row.j);
  sidecar["j_grid"] = grid;
  std::ofstream js(json_path);
  if (!js) throw ConfigError("cannot open " + json_path);
  js << sidecar.dump(2) << '\n';
}

}  // namespace synth
