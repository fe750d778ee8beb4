#include "synth/hmc.hpp"

#include <algorithm>
#include <cmath>

#include "synth/errors.hpp"
#include "synth/parallel.hpp"
#include "synth/rng.hpp"

namespace synth::hmc {

namespace {

struct Phase {
  int step_only_head;  // identity-mass step-size tuning
  int variance_end;    // variance accumulation window ends here
};

Phase warmup_phases(int warmup) {
  Phase p;
  p.step_only_head = std::max(1, warmup / 10);
  p.variance_end = std::max(p.step_only_head + 1, (warmup * 4) / 5);
  return p;
}

ChainResult run_chain(const Target& target, const Config& config,
                      std::uint64_t seed, std::uint64_t chain_index,
                      const Eigen::VectorXd& init) {
  const int dim = target.dim();
  Rng rng(seed, derive_stream(0x68'6d'63, chain_index));

  Eigen::VectorXd q = init;
  for (int i = 0; i < dim; ++i)
    q(i) += config.init_jitter * (2.0 * rng.uniform() - 1.0);

  Eigen::VectorXd grad(dim);
  double logp = target.log_density(q, grad);
  if (!std::isfinite(logp))
    throw NumericalError("HMC initial point has non-finite log density");

  Eigen::VectorXd inv_mass = Eigen::VectorXd::Ones(dim);
  DualAveraging da(config.initial_step, config.target_accept);
  double step = config.initial_step;

  // Welford accumulators for the mass-matrix window.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(dim);
  long welford_n = 0;

  const Phase phase = warmup_phases(config.warmup);
  const int total = config.warmup + config.draws;

  ChainResult result;
  result.draws.resize(config.draws, dim);
  double accept_sum = 0.0;
  int accept_count = 0;

  Eigen::VectorXd p(dim), q_new(dim), grad_new(dim);
  for (int iter = 0; iter < total; ++iter) {
    const bool warming = iter < config.warmup;

    for (int i = 0; i < dim; ++i) p(i) = rng.normal() / std::sqrt(inv_mass(i));
    const double h0 = -logp + 0.5 * (p.array().square() * inv_mass.array()).sum();

    const int leaps = 1 + static_cast<int>(rng.integer(
                              static_cast<std::uint64_t>(config.max_leapfrog)));
    q_new = q;
    grad_new = grad;
    Eigen::VectorXd p_new = p;
    double logp_new = logp;
    bool divergent = false;

    p_new += 0.5 * step * grad_new;
    for (int leap = 0; leap < leaps; ++leap) {
      q_new.array() += step * inv_mass.array() * p_new.array();
      if (!q_new.allFinite()) {
        divergent = true;
        break;
      }
      logp_new = target.log_density(q_new, grad_new);
      if (!std::isfinite(logp_new) || !grad_new.allFinite()) {
        divergent = true;
        break;
      }
      p_new += (leap + 1 < leaps ? step : 0.5 * step) * grad_new;
    }

    double accept_prob = 0.0;
    if (!divergent) {
      const double h1 =
          -logp_new + 0.5 * (p_new.array().square() * inv_mass.array()).sum();
      const double dh = h1 - h0;
      if (!std::isfinite(dh) || dh > 1000.0) {
        divergent = true;
      } else {
        accept_prob = std::min(1.0, std::exp(-dh));
        if (rng.uniform() < accept_prob) {
          q = q_new;
          grad = grad_new;
          logp = logp_new;
        }
      }
    }
    if (divergent) result.divergences += 1;

    if (warming) {
      da.update(accept_prob);
      step = da.step_size();
      if (iter >= phase.step_only_head && iter < phase.variance_end) {
        ++welford_n;
        const Eigen::VectorXd delta = q - mean;
        mean += delta / static_cast<double>(welford_n);
        m2.array() += delta.array() * (q - mean).array();
      }
      if (iter + 1 == phase.variance_end && welford_n > 4) {
        // Regularized variance estimate, then re-tune the step size.
        const double n = static_cast<double>(welford_n);
        inv_mass = (m2 / (n - 1.0)) * (n / (n + 5.0));
        inv_mass.array() += 1e-3 * (5.0 / (n + 5.0));
        inv_mass = inv_mass.array().max(1e-10).matrix();
        da.restart(da.adapted_step_size());
        step = da.step_size();
      }
      if (iter + 1 == config.warmup) step = da.adapted_step_size();
    } else {
      accept_sum += accept_prob;
      ++accept_count;
      result.draws.row(iter - config.warmup) = q;
    }
  }

  result.accept_rate = accept_count > 0 ? accept_sum / accept_count : 0.0;
  result.step_size = step;
  result.inv_mass = inv_mass;
  return result;
}

// Autocovariance of xs at the given lag (denominator n).
double autocov(const Eigen::VectorXd& xs, int lag, double mean) {
  const int n = static_cast<int>(xs.size());
  double s = 0.0;
  for (int t = 0; t + lag < n; ++t) s += (xs(t) - mean) * (xs(t + lag) - mean);
  return s / n;
}

}  // namespace

RunResult run(const Target& target, const Config& config, std::uint64_t seed,
              const Eigen::VectorXd& init) {
  if (config.chains < 1) throw ConfigError("sampler needs at least one chain");
  if (config.draws < 1) throw ConfigError("sampler needs at least one draw");
  if (config.warmup < 10) throw ConfigError("sampler needs at least 10 warmup iterations");
  if (config.max_leapfrog < 1) throw ConfigError("max_leapfrog must be positive");
  if (!(config.target_accept > 0.0 && config.target_accept < 1.0))
    throw ConfigError("target_accept must lie in (0,1)");
  if (init.size() != target.dim()) throw ConfigError("init size does not match target dim");

  RunResult result;
  result.chains.resize(config.chains);
  parallel_for(static_cast<std::size_t>(config.chains), config.threads,
               [&](std::size_t c) {
                 result.chains[c] = run_chain(target, config, seed, c, init);
               });

  double accept = 0.0;
  for (const auto& chain : result.chains) {
    accept += chain.accept_rate;
    result.divergences += chain.divergences;
  }
  result.accept_rate = accept / config.chains;
  result.total_transitions = config.chains * (config.warmup + config.draws);
  return result;
}

double split_rhat(const std::vector<Eigen::VectorXd>& chains) {
  std::vector<Eigen::VectorXd> halves;
  for (const auto& chain : chains) {
    const int n = static_cast<int>(chain.size());
    const int half = n / 2;
    if (half < 2) return std::numeric_limits<double>::quiet_NaN();
    halves.push_back(chain.head(half));
    halves.push_back(chain.tail(half));
  }
  const int m = static_cast<int>(halves.size());
  const int n = static_cast<int>(halves.front().size());

  Eigen::VectorXd means(m), vars(m);
  for (int i = 0; i < m; ++i) {
    means(i) = halves[i].mean();
    vars(i) = (halves[i].array() - means(i)).square().sum() / (n - 1);
  }
  const double grand = means.mean();
  const double b = n * (means.array() - grand).square().sum() / (m - 1);
  const double w = vars.mean();
  if (w <= 0.0) return 1.0;  // constant chains
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<Eigen::VectorXd>& chains) {
  const int m = static_cast<int>(chains.size());
  const int n = static_cast<int>(chains.front().size());
  if (n < 4) return static_cast<double>(m * n);

  Eigen::VectorXd means(m), vars(m);
  std::vector<Eigen::VectorXd> acov(m);
  const int max_lag = std::min(n - 1, 1000);
  for (int i = 0; i < m; ++i) {
    means(i) = chains[i].mean();
    acov[i].resize(max_lag + 1);
    for (int lag = 0; lag <= max_lag; ++lag)
      acov[i](lag) = autocov(chains[i], lag, means(i));
    vars(i) = acov[i](0) * n / (n - 1.0);
  }
  const double grand = means.mean();
  const double w = vars.mean();
  double b = 0.0;
  if (m > 1) b = n * (means.array() - grand).square().sum() / (m - 1);
  const double var_plus = (n - 1.0) / n * w + (m > 1 ? b / n : 0.0);
  if (var_plus <= 0.0) return static_cast<double>(m * n);

  // Geyer initial monotone positive sequence on paired correlations.
  double rho_prev_pair = 0.0;
  double tau = 1.0;
  bool first_pair = true;
  for (int lag = 1; lag + 1 <= max_lag; lag += 2) {
    double mean_acov_even = 0.0, mean_acov_odd = 0.0;
    for (int i = 0; i < m; ++i) {
      mean_acov_even += acov[i](lag);
      mean_acov_odd += acov[i](lag + 1);
    }
    mean_acov_even /= m;
    mean_acov_odd /= m;
    const double rho_even = 1.0 - (w - mean_acov_even) / var_plus;
    const double rho_odd = 1.0 - (w - mean_acov_odd) / var_plus;
    double pair = rho_even + rho_odd;
    if (pair < 0.0) break;
    if (!first_pair) pair = std::min(pair, rho_prev_pair);
    tau += 2.0 * pair;
    rho_prev_pair = pair;
    first_pair = false;
  }
  return static_cast<double>(m) * n / std::max(tau, 1e-12);
}

}  // namespace synth::hmc
