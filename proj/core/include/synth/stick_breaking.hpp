#pragma once

#include <Eigen/Dense>

namespace synth::stick {

/// Stick-breaking bijection between R^{K-1} and the interior of the
/// K-simplex, with the log(K-k-1) offset that maps y = 0 to the barycenter.
/// z_k = logistic(y_k - log(K-k-1)); x_k = stick_k z_k; stick_{k+1} = stick_k (1 - z_k).
struct State {
  Eigen::VectorXd z;       ///< K-1 break fractions
  Eigen::VectorXd sticks;  ///< K-1 remaining stick before each break
  Eigen::VectorXd x;       ///< K simplex point
};

State forward(const Eigen::VectorXd& y);

/// Inverse map; x must lie strictly inside the simplex.
Eigen::VectorXd inverse(const Eigen::VectorXd& x);

/// log |det dx/dy| = sum_k log(stick_k z_k (1 - z_k)).
double log_jacobian(const State& state);

/// Chain rule: maps dL/dx to dL/dy for L a function of x alone.
Eigen::VectorXd pullback(const State& state, const Eigen::VectorXd& grad_x);

/// d log|det dx/dy| / dy_k = 1 - z_k (K - k)  (0-based k).
Eigen::VectorXd log_jacobian_grad(const State& state);

}  // namespace synth::stick
