#pragma once

#include <Eigen/Dense>
#include <utility>

#include "synth/panel.hpp"

namespace synth {

/// Maximizer of the Gaussian pseudo log-likelihood
///   l(w, S) = -log(2 pi S)/2 - (1/t0) sum_t (y_1t - y_Jt' w)^2 / (2 S)
/// over the pre-treatment outcomes. w_hat is the unconstrained solution of
/// the normal equations (QR); sigma_sq_hat the profile maximizer (mean
/// squared residual). vcov estimates the asymptotic covariance of
/// sqrt(t0) (w_hat - w), namely sigma_sq_hat * Dhat^{-1} with
/// Dhat = (1/t0) sum_t y_Jt y_Jt'.
struct MleFit {
  Eigen::VectorXd w_hat;
  double sigma_sq_hat = 0.0;
  double loglik = 0.0;
  Eigen::MatrixXd vcov;
  int t0 = 0;
};

/// Throws InsufficientDataError when t0 <= J and RankError when the donor
/// block is rank deficient.
MleFit fit_mle(const Panel& panel);

/// Symmetric normal-approximation interval for contrast' w at the given
/// level: contrast' w_hat +/- z * sqrt(contrast' vcov contrast / t0).
std::pair<double, double> wald_interval(const MleFit& fit,
                                        const Eigen::VectorXd& contrast,
                                        double level);

}  // namespace synth
