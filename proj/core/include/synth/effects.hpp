#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "synth/panel.hpp"

namespace synth {

/// Per-period treatment effects on the treated for t > t0:
/// tau_t = Y_1t - sum_j w_j Y_jt, with the post-period mean.
struct EffectSeries {
  std::vector<std::string> periods;  ///< post-period labels
  Eigen::VectorXd taus;              ///< T - t0 effects
  Eigen::VectorXd counterfactual;    ///< weighted donor outcomes
  double mean_effect = 0.0;
};

EffectSeries effects(const Panel& panel, const Eigen::VectorXd& w);

}  // namespace synth
