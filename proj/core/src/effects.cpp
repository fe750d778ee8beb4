#include "synth/effects.hpp"

#include "synth/errors.hpp"

namespace synth {

EffectSeries effects(const Panel& panel, const Eigen::VectorXd& w) {
  panel.validate();
  const int j = panel.num_donors();
  if (w.size() != j)
    throw ConfigError("weight vector length " + std::to_string(w.size()) +
                      " does not match donor count " + std::to_string(j));
  if (!w.allFinite()) throw NumericalError("weights contain non-finite entries");

  const int post = panel.post_periods();
  EffectSeries series;
  series.periods.assign(panel.times.begin() + panel.t0, panel.times.end());
  series.counterfactual = panel.outcomes.bottomRows(post).rightCols(j) * w;
  series.taus = panel.outcomes.col(0).tail(post) - series.counterfactual;
  series.mean_effect = series.taus.mean();
  return series;
}

}  // namespace synth
