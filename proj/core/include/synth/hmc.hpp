#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace synth::hmc {

/// Differentiable log density on R^dim.
class Target {
 public:
  virtual ~Target() = default;
  virtual int dim() const = 0;
  /// Returns the log density at theta and fills grad (resized by the caller).
  /// May return -inf for out-of-support points; must not throw for finite theta.
  virtual double log_density(const Eigen::VectorXd& theta,
                             Eigen::VectorXd& grad) const = 0;
};

/// Dual-averaging step-size adaptation (Hoffman & Gelman 2014, Alg. 5).
class DualAveraging {
 public:
  DualAveraging(double initial_step, double target_accept, double t0 = 10.0,
                double gamma = 0.05, double kappa = 0.75)
      : mu_(std::log(10.0 * initial_step)),
        log_eps_(std::log(initial_step)),
        target_(target_accept),
        t0_(t0),
        gamma_(gamma),
        kappa_(kappa) {}

  void update(double accept_prob) {
    ++count_;
    const double eta = 1.0 / (count_ + t0_);
    h_bar_ = (1.0 - eta) * h_bar_ + eta * (target_ - accept_prob);
    log_eps_ = mu_ - std::sqrt(static_cast<double>(count_)) / gamma_ * h_bar_;
    const double weight = std::pow(static_cast<double>(count_), -kappa_);
    log_eps_bar_ = weight * log_eps_ + (1.0 - weight) * log_eps_bar_;
  }

  double step_size() const { return std::exp(log_eps_); }
  double adapted_step_size() const { return std::exp(log_eps_bar_); }

  void restart(double step) {
    mu_ = std::log(10.0 * step);
    log_eps_ = std::log(step);
    log_eps_bar_ = 0.0;
    h_bar_ = 0.0;
    count_ = 0;
  }

 private:
  double mu_;
  double log_eps_;
  double log_eps_bar_ = 0.0;
  double h_bar_ = 0.0;
  double target_;
  double t0_;
  double gamma_;
  double kappa_;
  long count_ = 0;
};

struct Config {
  int chains = 4;
  int warmup = 1000;
  int draws = 1000;
  double target_accept = 0.8;
  int max_leapfrog = 32;     ///< leapfrog count jittered uniformly on [1, max]
  double initial_step = 0.1;
  double init_jitter = 1.0;  ///< chains start at init + U(-jitter, jitter)
  unsigned threads = 1;      ///< chains run in parallel up to this
};

struct ChainResult {
  Eigen::MatrixXd draws;  ///< draws x dim, unconstrained coordinates
  double accept_rate = 0.0;
  int divergences = 0;
  double step_size = 0.0;
  Eigen::VectorXd inv_mass;
};

struct RunResult {
  std::vector<ChainResult> chains;
  double accept_rate = 0.0;  ///< pooled post-warmup mean acceptance probability
  int divergences = 0;
  int total_transitions = 0;
};

/// Fixed-path-length HMC with jittered leapfrog count, dual-averaging step
/// size and diagonal mass-matrix adaptation during warmup. Chain c draws
/// from stream derive_stream(seed, c); results are identical regardless of
/// thread count.
RunResult run(const Target& target, const Config& config, std::uint64_t seed,
              const Eigen::VectorXd& init);

/// Split potential-scale-reduction across chains of one scalar parameter.
double split_rhat(const std::vector<Eigen::VectorXd>& chains);

/// Effective sample size across chains (Geyer initial monotone sequence).
double effective_sample_size(const std::vector<Eigen::VectorXd>& chains);

}  // namespace synth::hmc
