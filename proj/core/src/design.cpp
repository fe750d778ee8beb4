#include "synth/design.hpp"

#include <algorithm>
#include <cmath>

#include "synth/errors.hpp"

namespace synth {

DesignPair build_design(const Panel& panel, const PredictorSpec& spec) {
  panel.validate();
  const int t0 = panel.t0;
  const int n = panel.num_units();

  std::vector<int> covariate_rows;
  for (const auto& name : spec.covariates) {
    const auto it = std::find(panel.predictor_names.begin(),
                              panel.predictor_names.end(), name);
    if (it == panel.predictor_names.end())
      throw ConfigError("unknown covariate in design spec: " + name);
    covariate_rows.push_back(static_cast<int>(it - panel.predictor_names.begin()));
  }

  std::vector<std::vector<double>> combos = spec.combinations;
  std::vector<std::string> combo_labels = spec.combination_labels;
  if (!combo_labels.empty() && combo_labels.size() != combos.size())
    throw ConfigError("combination_labels length does not match combinations");
  if (combo_labels.empty())
    for (std::size_t m = 0; m < combos.size(); ++m)
      combo_labels.push_back("combo" + std::to_string(m + 1));

  if (spec.pre_period_mean) {
    combos.emplace_back(t0, 1.0 / static_cast<double>(t0));
    combo_labels.push_back("pre_mean");
  }
  if (spec.all_pre_outcomes) {
    for (int t = 0; t < t0; ++t) {
      std::vector<double> e(t0, 0.0);
      e[t] = 1.0;
      combos.push_back(std::move(e));
      combo_labels.push_back("pre:" + panel.times[t]);
    }
  }

  for (const auto& combo : combos)
    if (static_cast<int>(combo.size()) != t0)
      throw ConfigError("combination vector length " + std::to_string(combo.size()) +
                        " does not match pre-period length " + std::to_string(t0));

  const int k = static_cast<int>(covariate_rows.size() + combos.size());
  if (k == 0) throw ConfigError("design spec selects no predictors");

  DesignPair design;
  design.x1.resize(k);
  design.x0.resize(k, n - 1);
  design.labels.reserve(k);

  int row = 0;
  for (int cov : covariate_rows) {
    design.x1(row) = panel.predictors(cov, 0);
    design.x0.row(row) = panel.predictors.row(cov).tail(n - 1);
    design.labels.push_back(panel.predictor_names[cov]);
    ++row;
  }
  const Eigen::MatrixXd pre = panel.outcomes.topRows(t0);
  for (std::size_t m = 0; m < combos.size(); ++m) {
    const Eigen::Map<const Eigen::VectorXd> c(combos[m].data(), t0);
    const Eigen::RowVectorXd values = c.transpose() * pre;
    design.x1(row) = values(0);
    design.x0.row(row) = values.tail(n - 1);
    design.labels.push_back(combo_labels[m]);
    ++row;
  }

  if (spec.v.empty()) {
    design.v = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  } else {
    if (static_cast<int>(spec.v.size()) != k)
      throw ConfigError("v length " + std::to_string(spec.v.size()) +
                        " does not match predictor count " + std::to_string(k));
    design.v.resize(k);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      if (!(spec.v[i] >= 0.0) || !std::isfinite(spec.v[i]))
        throw ConfigError("v entries must be finite and nonnegative");
      design.v(i) = spec.v[i];
      total += spec.v[i];
    }
    if (total <= 0.0) throw ConfigError("v entries sum to zero");
    design.v /= total;
  }
  return design;
}

DesignPair outcomes_design(const Panel& panel) {
  // Same result as build_design with all_pre_outcomes, assembled as a block
  // copy since identity combinations just select the pre-period rows.
  panel.validate();
  const int t0 = panel.t0;
  const int j = panel.num_donors();
  DesignPair design;
  design.x1 = panel.outcomes.col(0).head(t0);
  design.x0 = panel.outcomes.topRows(t0).rightCols(j);
  design.labels.reserve(t0);
  for (int t = 0; t < t0; ++t) design.labels.push_back("pre:" + panel.times[t]);
  design.v = Eigen::VectorXd::Constant(t0, 1.0 / static_cast<double>(t0));
  return design;
}

}  // namespace synth
