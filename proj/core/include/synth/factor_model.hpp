#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "synth/panel.hpp"

namespace synth {

enum class FactorLaw { iid_gaussian, ar1 };

/// Primitives of the single-factor outcome model: Y_it = lambda_i * F_t + eps_it
/// with F_t ~ N(0, sigma_f^2) and eps_it ~ N(0, noise_sd^2).
struct FactorSpec {
  double lambda1 = 1.0;      ///< treated loading
  Eigen::VectorXd lambdas;   ///< J donor loadings
  double sigma_f = 1.0;      ///< factor standard deviation, > 0
  double noise_sd = 1.0;     ///< idiosyncratic standard deviation, > 0
  FactorLaw law = FactorLaw::iid_gaussian;
  double rho = 0.0;          ///< AR(1) coefficient, used when law == ar1

  int num_donors() const { return static_cast<int>(lambdas.size()); }
  void validate() const;
};

/// Closed-form weights of the conditional law of the treated outcome given
/// the donor outcomes: w_j = sigma^2 lambda_1 lambda_j / (noise^2 + sigma^2 |lambda|^2).
/// Requires the iid Gaussian factor law.
Eigen::VectorXd conditional_weights(const FactorSpec& spec);

/// Conditional variance (Schur complement of the joint covariance):
/// noise^2 + lambda_1^2 sigma^2 - sigma^4 lambda_1^2 |lambda|^2 / (noise^2 + sigma^2 |lambda|^2).
double conditional_variance(const FactorSpec& spec);

/// Diagnostics for whether the conditional-mean weights form a synthetic
/// control (nonnegative, sum one).
struct CharacterizationReport {
  bool sign_ok = false;          ///< no donor loading has sign opposite to lambda1
  double sphere_residual = 0.0;  ///< sum lambda_j^2 - lambda1 sum lambda_j + noise^2/sigma^2
  bool in_simplex = false;       ///< weights >= -tol and |sum - 1| <= tol
};

/// in_simplex is computed from the weights; it holds iff sign_ok and the
/// sphere residual vanishes up to tol * (noise^2 + sigma^2 |lambda|^2) / sigma^2.
CharacterizationReport check_characterization(const FactorSpec& spec, double tol = 1e-9);

/// Simulates the single-factor model with zero treatment effect.
/// Stream layout: factors from (seed, stream 0), noise from (seed, stream 1).
Panel simulate_single_factor(const FactorSpec& spec, int t_total, int t0,
                             std::uint64_t seed);

/// Grouped factor model: per-group loading paths follow a stationary AR(1)
/// (init N(0, 1/(1 - rho^2)), standard Gaussian innovations) and
/// Y_it = lambda_{g(i),t} + noise_sd * eps_it. Donors form `groups` groups of
/// `group_size`; the treated unit shares group 0 with the first donor.
/// Treatment effect is zero.
Panel simulate_grouped(int groups, int group_size, double rho, double noise_sd,
                       int t_total, int t0, std::uint64_t seed);

struct ConvergenceRow {
  int j = 0;
  double mean_abs_error = 0.0;
};

/// Monte-Carlo prediction error of the conditional-mean weights. For each J
/// in j_grid, draws `reps` fresh periods (factor + donor noise) and averages
/// |y' w - lambda1 * F|. lambda_rule(J) supplies the donor loadings.
/// Replication r of grid entry g uses stream derive(derive(seed, g), r).
std::vector<ConvergenceRow> predictor_convergence_experiment(
    const std::function<Eigen::VectorXd(int)>& lambda_rule,
    const std::vector<int>& j_grid, double sigma, int reps, std::uint64_t seed,
    double lambda1 = 1.0, unsigned threads = 1);

/// Writes the experiment table (one row per J) and a JSON sidecar holding the
/// full configuration and seed.
void write_convergence_report(const std::vector<ConvergenceRow>& rows,
                              const std::string& rule_name, double sigma,
                              int reps, std::uint64_t seed,
                              const std::string& csv_path,
                              const std::string& json_path);

}  // namespace synth
