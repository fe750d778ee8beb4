#include "synth/bayes_model.hpp"

#include <cmath>
#include <limits>

#include "synth/errors.hpp"
#include "synth/rng.hpp"
#include "synth/stats.hpp"
#include "synth/stick_breaking.hpp"

namespace synth {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

}  // namespace

BayesTarget::BayesTarget(BayesModelSpec spec, DesignPair design)
    : spec_(std::move(spec)), design_(std::move(design)) {
  donors_ = design_.num_donors();
  rows_ = design_.num_rows();
  if (donors_ < 1) throw ConfigError("Bayes model needs at least one donor");
  if (!(spec_.sigma_prior_scale > 0.0))
    throw ConfigError("sigma_prior_scale must be positive");

  if (spec_.use_predictor_weights) {
    if (rows_ < 1) throw ConfigError("predictor weights need at least one design row");
    if (spec_.gamma_prior.empty()) {
      gamma_conc_ = Eigen::VectorXd::Ones(rows_);
    } else {
      if (static_cast<int>(spec_.gamma_prior.size()) != rows_)
        throw ConfigError("gamma_prior length does not match design rows");
      gamma_conc_.resize(rows_);
      for (int k = 0; k < rows_; ++k) {
        if (!(spec_.gamma_prior[k] > 0.0))
          throw ConfigError("gamma_prior entries must be positive");
        gamma_conc_(k) = spec_.gamma_prior[k];
      }
    }
    gamma_log_norm_ = std::lgamma(gamma_conc_.sum());
    for (int k = 0; k < rows_; ++k) gamma_log_norm_ -= std::lgamma(gamma_conc_(k));
  }
}

int BayesTarget::gamma_coords() const {
  return spec_.use_predictor_weights && rows_ > 1 ? rows_ - 1 : 0;
}

int BayesTarget::dim() const { return weight_coords() + 1 + gamma_coords(); }

BayesTarget::Constrained BayesTarget::constrain(const Eigen::VectorXd& theta) const {
  Constrained out;
  out.w = stick::forward(theta.head(weight_coords())).x;
  out.sigma = std::exp(theta(weight_coords()));
  if (spec_.use_predictor_weights)
    out.gamma = stick::forward(theta.tail(gamma_coords())).x;
  return out;
}

double BayesTarget::log_density(const Eigen::VectorXd& theta,
                                Eigen::VectorXd& grad) const {
  const int wc = weight_coords();
  const int gc = gamma_coords();
  grad.setZero(dim());

  const double t_sigma = theta(wc);
  if (t_sigma > 350.0 || t_sigma < -350.0) return kNegInf;
  const double sigma = std::exp(t_sigma);
  const double sigma_sq = sigma * sigma;

  const stick::State sw = stick::forward(theta.head(wc));
  stick::State sg;
  Eigen::VectorXd gamma;
  if (spec_.use_predictor_weights) {
    sg = stick::forward(theta.tail(gc));
    gamma = sg.x;
  } else {
    gamma = Eigen::VectorXd::Ones(rows_);
  }

  double logp = 0.0;

  // Likelihood over the design rows (empty design: prior only).
  Eigen::VectorXd residual;
  if (rows_ > 0) {
    residual = design_.x1 - design_.x0 * sw.x;
    const Eigen::ArrayXd g2r2 =
        gamma.array().square() * residual.array().square();
    logp += -rows_ * std::log(sigma) - 0.5 * rows_ * kLog2Pi;
    if (spec_.use_predictor_weights) logp += gamma.array().log().sum();
    logp += -0.5 * g2r2.sum() / sigma_sq;
  }

  // Priors: Dir(1) on w (constant), half-normal sigma, Dir(v) on Gamma.
  logp += std::lgamma(static_cast<double>(donors_));
  const double scale = spec_.sigma_prior_scale;
  logp += 0.5 * std::log(2.0 / M_PI) - std::log(scale) -
          0.5 * sigma_sq / (scale * scale);
  if (spec_.use_predictor_weights) {
    logp += gamma_log_norm_;
    logp += ((gamma_conc_.array() - 1.0) * gamma.array().log()).sum();
  }

  // Change-of-variable terms.
  logp += stick::log_jacobian(sw) + t_sigma;
  if (spec_.use_predictor_weights) logp += stick::log_jacobian(sg);
  if (!std::isfinite(logp)) return kNegInf;

  // Gradient.
  if (wc > 0) {
    Eigen::VectorXd grad_w = Eigen::VectorXd::Zero(donors_);
    if (rows_ > 0)
      grad_w = design_.x0.transpose() *
               (gamma.array().square() * residual.array()).matrix() / sigma_sq;
    grad.head(wc) = stick::pullback(sw, grad_w) + stick::log_jacobian_grad(sw);
  }
  double grad_sigma = -sigma_sq / (scale * scale) + 1.0;
  if (rows_ > 0) {
    const double g2r2_sum =
        (gamma.array().square() * residual.array().square()).sum();
    grad_sigma += -rows_ + g2r2_sum / sigma_sq;
  }
  grad(wc) = grad_sigma;
  if (gc > 0) {
    // d/dGamma_k of [log Gamma_k - Gamma_k^2 r_k^2/(2 sigma^2) + (v_k-1) log Gamma_k].
    Eigen::VectorXd grad_gamma =
        gamma_conc_.cwiseQuotient(gamma) -
        (gamma.array() * residual.array().square()).matrix() / sigma_sq;
    grad.tail(gc) = stick::pullback(sg, grad_gamma) + stick::log_jacobian_grad(sg);
  }
  return logp;
}

double log_posterior(const BayesModelSpec& spec, const DesignPair& design,
                     const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
  if (!theta.allFinite()) throw NumericalError("theta has non-finite entries");
  const BayesTarget target(spec, design);
  if (theta.size() != target.dim())
    throw ConfigError("theta length does not match parameter layout");
  return target.log_density(theta, grad);
}

PosteriorDraws sample(const BayesModelSpec& spec, const Panel& panel,
                      const DesignPair& design, const SamplerConfig& config,
                      std::uint64_t seed) {
  panel.validate();
  if (design.num_donors() != panel.num_donors())
    throw ConfigError("design donor count does not match panel");

  const BayesTarget target(spec, design);
  hmc::Config hc;
  hc.chains = config.chains;
  hc.warmup = config.warmup;
  hc.draws = config.draws;
  hc.target_accept = config.target_accept;
  hc.max_leapfrog = config.max_leapfrog;
  hc.threads = config.threads;
  const Eigen::VectorXd init = Eigen::VectorXd::Zero(target.dim());
  const hmc::RunResult run = hmc::run(target, hc, seed, init);

  const int j = panel.num_donors();
  const int k = design.num_rows();
  const int per_chain = config.draws;
  const int m = config.chains * per_chain;
  const bool has_gamma = spec.use_predictor_weights;

  PosteriorDraws out;
  out.w_draws.resize(m, j);
  out.sigma_draws.resize(m);
  if (has_gamma) out.gamma_draws.resize(m, k);
  out.chains = config.chains;
  out.accept_rate = run.accept_rate;
  out.divergences = run.divergences;
  out.total_transitions = run.total_transitions;

  int row = 0;
  for (const auto& chain : run.chains) {
    for (int i = 0; i < per_chain; ++i, ++row) {
      const auto c = target.constrain(chain.draws.row(i).transpose());
      out.w_draws.row(row) = c.w.transpose();
      out.sigma_draws(row) = c.sigma;
      if (has_gamma) out.gamma_draws.row(row) = c.gamma.transpose();
    }
  }

  for (int i = 0; i < m; ++i) {
    if (std::abs(out.w_draws.row(i).sum() - 1.0) > 1e-12 ||
        (out.w_draws.row(i).array() < -1e-12).any())
      throw NumericalError("posterior weight draw left the simplex");
    if (!(out.sigma_draws(i) > 0.0))
      throw NumericalError("posterior sigma draw is not positive");
  }

  // Counterfactuals on the post-period outcomes.
  const int post = panel.post_periods();
  const Eigen::MatrixXd donors_post = panel.outcomes.bottomRows(post).rightCols(j);
  const Eigen::VectorXd treated_post = panel.outcomes.col(0).tail(post);
  out.counterfactual_draws = out.w_draws * donors_post.transpose();
  if (spec.include_predictive_noise) {
    Rng noise(seed, derive_stream(0x70'72'65'64, 0));
    for (int i = 0; i < m; ++i)
      for (int t = 0; t < post; ++t)
        out.counterfactual_draws(i, t) += out.sigma_draws(i) * noise.normal();
  }
  out.tau_draws = (-out.counterfactual_draws).rowwise() + treated_post.transpose();

  // Per-parameter split R-hat and ESS on the constrained draws.
  auto column_chains = [&](auto getter) {
    std::vector<Eigen::VectorXd> per(config.chains);
    for (int c = 0; c < config.chains; ++c) {
      per[c].resize(per_chain);
      for (int i = 0; i < per_chain; ++i) per[c](i) = getter(c * per_chain + i);
    }
    return per;
  };
  auto add_diag = [&](const std::string& name, auto getter) {
    const auto per = column_chains(getter);
    ParamDiagnostic d;
    d.name = name;
    d.rhat = hmc::split_rhat(per);
    d.ess = hmc::effective_sample_size(per);
    out.diagnostics.push_back(std::move(d));
  };
  for (int col = 0; col < j; ++col)
    add_diag("w" + std::to_string(col + 1),
             [&, col](int i) { return out.w_draws(i, col); });
  add_diag("sigma", [&](int i) { return out.sigma_draws(i); });
  if (has_gamma)
    for (int col = 0; col < k; ++col)
      add_diag("gamma" + std::to_string(col + 1),
               [&, col](int i) { return out.gamma_draws(i, col); });

  const double divergence_rate =
      static_cast<double>(run.divergences) / run.total_transitions;
  if (divergence_rate > 0.10)
    out.warnings.push_back("SamplerWarning: divergence rate " +
                           std::to_string(divergence_rate) + " exceeds 10%");
  for (const auto& d : out.diagnostics)
    if (std::isfinite(d.rhat) && d.rhat > 1.05)
      out.warnings.push_back("ConvergenceWarning: R-hat " + std::to_string(d.rhat) +
                             " for " + d.name);
  return out;
}

PosteriorSummary summarize(const PosteriorDraws& draws,
                           const std::vector<double>& levels) {
  const int m = draws.num_draws();
  if (m < 1) throw ConfigError("no posterior draws to summarize");
  for (double level : levels)
    if (!(level > 0.0 && level < 1.0))
      throw ConfigError("interval levels must lie in (0,1)");

  const int post = static_cast<int>(draws.tau_draws.cols());
  std::vector<double> mean_effects(m);
  for (int i = 0; i < m; ++i) mean_effects[i] = draws.tau_draws.row(i).mean();

  PosteriorSummary summary;
  summary.mean_effect = stats::mean(mean_effects);
  summary.period_mean = draws.tau_draws.colwise().mean();

  for (double level : levels) {
    IntervalBand band;
    band.level = level;
    const double alpha = 0.5 * (1.0 - level);
    band.lo = stats::quantile(mean_effects, alpha);
    band.hi = stats::quantile(mean_effects, 1.0 - alpha);
    band.period_lo.resize(post);
    band.period_hi.resize(post);
    std::vector<double> column(m);
    for (int t = 0; t < post; ++t) {
      for (int i = 0; i < m; ++i) column[i] = draws.tau_draws(i, t);
      band.period_lo(t) = stats::quantile(column, alpha);
      band.period_hi(t) = stats::quantile(column, 1.0 - alpha);
    }
    summary.bands.push_back(std::move(band));
  }
  return summary;
}

WeightCorrelations weight_marginals_and_correlations(const PosteriorDraws& draws) {
  const int m = draws.num_draws();
  const int j = draws.num_donors();
  if (m < 2) throw ConfigError("correlations need at least two draws");

  WeightCorrelations out;
  out.correlation = Eigen::MatrixXd::Zero(j, j);
  out.zero_variance.assign(j, false);

  Eigen::VectorXd means(j), sds(j);
  std::vector<double> column(m);
  for (int a = 0; a < j; ++a) {
    for (int i = 0; i < m; ++i) column[i] = draws.w_draws(i, a);
    WeightMarginal marginal;
    marginal.donor = "w" + std::to_string(a + 1);
    marginal.mean = stats::mean(column);
    marginal.sd = stats::sample_sd(column);
    marginal.q025 = stats::quantile(column, 0.025);
    marginal.q25 = stats::quantile(column, 0.25);
    marginal.median = stats::quantile(column, 0.5);
    marginal.q75 = stats::quantile(column, 0.75);
    marginal.q975 = stats::quantile(column, 0.975);
    means(a) = marginal.mean;
    sds(a) = marginal.sd;
    if (marginal.sd <= 0.0) out.zero_variance[a] = true;
    out.marginals.push_back(std::move(marginal));
  }

  for (int a = 0; a < j; ++a) {
    out.correlation(a, a) = 1.0;
    for (int b = a + 1; b < j; ++b) {
      double value = 0.0;
      if (!out.zero_variance[a] && !out.zero_variance[b]) {
        double cov = 0.0;
        for (int i = 0; i < m; ++i)
          cov += (draws.w_draws(i, a) - means(a)) * (draws.w_draws(i, b) - means(b));
        cov /= (m - 1);
        value = std::clamp(cov / (sds(a) * sds(b)), -1.0, 1.0);
      }
      out.correlation(a, b) = value;
      out.correlation(b, a) = value;
    }
  }
  return out;
}

BiasBoundSummary bias_bound(const PosteriorDraws& draws, const Panel& panel) {
  panel.validate();
  const int m = draws.num_draws();
  const int j = panel.num_donors();
  if (draws.num_donors() != j) throw ConfigError("draws do not match panel donors");

  const int t0 = panel.t0;
  const Eigen::MatrixXd donors_pre = panel.outcomes.topRows(t0).rightCols(j);
  const Eigen::VectorXd treated_pre = panel.outcomes.col(0).head(t0);

  BiasBoundSummary out;
  out.per_draw_bound.resize(m);
  out.relative_bound.resize(m);
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd fit = donors_pre * draws.w_draws.row(i).transpose();
    out.per_draw_bound(i) = (treated_pre - fit).cwiseAbs().mean();
    const double effect = std::abs(draws.tau_draws.row(i).mean());
    if (effect > 0.0) {
      out.relative_bound(i) = out.per_draw_bound(i) / effect;
    } else {
      out.relative_bound(i) = std::numeric_limits<double>::infinity();
      ++out.infinite_count;
    }
  }
  return out;
}

}  // namespace synth
