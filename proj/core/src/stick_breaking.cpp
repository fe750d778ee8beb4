#include "synth/stick_breaking.hpp"

#include <cmath>

#include "synth/errors.hpp"

namespace synth::stick {

namespace {

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

State forward(const Eigen::VectorXd& y) {
  const auto km1 = y.size();
  State state;
  state.z.resize(km1);
  state.sticks.resize(km1);
  state.x.resize(km1 + 1);
  double stick = 1.0;
  for (Eigen::Index k = 0; k < km1; ++k) {
    const double offset = std::log(static_cast<double>(km1 - k));
    const double z = logistic(y(k) - offset);
    state.z(k) = z;
    state.sticks(k) = stick;
    state.x(k) = stick * z;
    stick -= state.x(k);
  }
  state.x(km1) = stick;
  return state;
}

Eigen::VectorXd inverse(const Eigen::VectorXd& x) {
  const auto k = x.size();
  if (k < 1) throw NumericalError("stick inverse needs a nonempty simplex point");
  Eigen::VectorXd y(k - 1);
  double remaining = 1.0;
  for (Eigen::Index i = 0; i < k - 1; ++i) {
    const double z = x(i) / remaining;
    if (!(z > 0.0 && z < 1.0))
      throw NumericalError("stick inverse needs a point strictly inside the simplex");
    y(i) = std::log(z / (1.0 - z)) + std::log(static_cast<double>(k - 1 - i));
    remaining -= x(i);
  }
  return y;
}

double log_jacobian(const State& state) {
  double logj = 0.0;
  for (Eigen::Index k = 0; k < state.z.size(); ++k)
    logj += std::log(state.sticks(k)) + std::log(state.z(k)) +
            std::log1p(-state.z(k));
  return logj;
}

Eigen::VectorXd pullback(const State& state, const Eigen::VectorXd& grad_x) {
  const auto km1 = state.z.size();
  Eigen::VectorXd grad_y(km1);
  // suffix = sum_{i > k} x_i dL/dx_i, accumulated right to left.
  double suffix = grad_x(km1) * state.x(km1);
  for (Eigen::Index k = km1 - 1; k >= 0; --k) {
    const double z = state.z(k);
    const double dz = state.sticks(k) * grad_x(k) - suffix / (1.0 - z);
    grad_y(k) = z * (1.0 - z) * dz;
    suffix += grad_x(k) * state.x(k);
  }
  return grad_y;
}

Eigen::VectorXd log_jacobian_grad(const State& state) {
  const auto km1 = state.z.size();
  Eigen::VectorXd grad(km1);
  for (Eigen::Index k = 0; k < km1; ++k)
    grad(k) = 1.0 - state.z(k) * static_cast<double>(km1 + 1 - k);
  return grad;
}

}  // namespace synth::stick
