#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "synth/design.hpp"
#include "synth/hmc.hpp"
#include "synth/panel.hpp"

namespace synth {

/// Bayesian synthetic-control model over the design rows:
///   x1 | w, sigma, Gamma ~ N(x0 w, sigma^2 diag(Gamma)^-2)
///   w ~ Dir(1),  sigma ~ halfNormal(sigma_prior_scale),  Gamma ~ Dir(v).
/// Gamma is active only when use_predictor_weights is set; otherwise the
/// row noise is homoskedastic sigma^2.
struct BayesModelSpec {
  bool use_predictor_weights = false;
  std::vector<double> gamma_prior;  ///< K concentrations; empty = all ones
  double sigma_prior_scale = 1.0;
  bool include_predictive_noise = true;
};

struct SamplerConfig {
  int chains = 4;
  int warmup = 1000;
  int draws = 1000;
  double target_accept = 0.8;
  int max_leapfrog = 32;
  unsigned threads = 1;
};

struct ParamDiagnostic {
  std::string name;
  double rhat = 1.0;
  double ess = 0.0;
};

struct PosteriorDraws {
  Eigen::MatrixXd w_draws;               ///< M x J, rows in the simplex
  Eigen::VectorXd sigma_draws;           ///< M, positive
  Eigen::MatrixXd gamma_draws;           ///< M x K when Gamma active, else 0 x 0
  Eigen::MatrixXd counterfactual_draws;  ///< M x (T - t0)
  Eigen::MatrixXd tau_draws;             ///< M x (T - t0), Y1t - counterfactual
  std::vector<ParamDiagnostic> diagnostics;
  double accept_rate = 0.0;
  int divergences = 0;
  int total_transitions = 0;
  int chains = 0;
  std::vector<std::string> warnings;  ///< sampler / convergence warnings (non-fatal)

  int num_draws() const { return static_cast<int>(w_draws.rows()); }
  int num_donors() const { return static_cast<int>(w_draws.cols()); }
  /// Mean post-period effect of draw m.
  double mean_effect(int m) const { return tau_draws.row(m).mean(); }
};

/// The transformed-coordinate posterior: stick-breaking for w (and Gamma),
/// log for sigma, with all change-of-variable terms included.
/// theta layout: [y_w (J-1), log sigma, y_gamma (K-1, when active)].
class BayesTarget : public hmc::Target {
 public:
  BayesTarget(BayesModelSpec spec, DesignPair design);

  int dim() const override;
  double log_density(const Eigen::VectorXd& theta,
                     Eigen::VectorXd& grad) const override;

  struct Constrained {
    Eigen::VectorXd w;
    double sigma = 1.0;
    Eigen::VectorXd gamma;
  };
  Constrained constrain(const Eigen::VectorXd& theta) const;

  int weight_coords() const { return donors_ > 1 ? donors_ - 1 : 0; }
  int gamma_coords() const;
  const BayesModelSpec& spec() const { return spec_; }
  const DesignPair& design() const { return design_; }

 private:
  BayesModelSpec spec_;
  DesignPair design_;
  int donors_ = 0;
  int rows_ = 0;
  Eigen::VectorXd gamma_conc_;
  double gamma_log_norm_ = 0.0;
};

/// Log joint density (likelihood, priors, Jacobians) and its exact gradient
/// at unconstrained theta. Throws NumericalError for non-finite theta.
double log_posterior(const BayesModelSpec& spec, const DesignPair& design,
                     const Eigen::VectorXd& theta, Eigen::VectorXd& grad);

/// Runs HMC and maps draws back to constrained space. Counterfactual draws
/// use the post-period donor outcomes; when include_predictive_noise is set
/// a sigma_m * N(0,1) term is added per draw and period.
PosteriorDraws sample(const BayesModelSpec& spec, const Panel& panel,
                      const DesignPair& design, const SamplerConfig& config,
                      std::uint64_t seed);

struct IntervalBand {
  double level = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  Eigen::VectorXd period_lo;
  Eigen::VectorXd period_hi;
};

struct PosteriorSummary {
  double mean_effect = 0.0;        ///< posterior mean of the mean post-period effect
  Eigen::VectorXd period_mean;     ///< posterior mean per post period
  std::vector<IntervalBand> bands; ///< equal-tailed intervals per level
};

PosteriorSummary summarize(const PosteriorDraws& draws,
                           const std::vector<double>& levels);

struct WeightMarginal {
  std::string donor;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, q975 = 0.0;
};

struct WeightCorrelations {
  std::vector<WeightMarginal> marginals;
  Eigen::MatrixXd correlation;     ///< J x J, unit diagonal, entries in [-1,1]
  std::vector<bool> zero_variance; ///< flagged donors (correlations reported as 0)
};

WeightCorrelations weight_marginals_and_correlations(const PosteriorDraws& draws);

/// Pre-treatment mean absolute fit deviation per draw, and that bound
/// relative to the absolute mean post-period effect of the draw.
struct BiasBoundSummary {
  Eigen::VectorXd per_draw_bound;  ///< M, >= 0
  Eigen::VectorXd relative_bound;  ///< M, +inf when the draw's mean effect is 0
  int infinite_count = 0;
};

BiasBoundSummary bias_bound(const PosteriorDraws& draws, const Panel& panel);

}  // namespace synth
