#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "synth/panel.hpp"

namespace synth {

/// Predictor design for the weight fit: x1 is the treated column, x0 the
/// donor block, one row per predictor. v holds the nonnegative predictor
/// weights (sum 1). Immutable after construction.
struct DesignPair {
  Eigen::VectorXd x1;                ///< K
  Eigen::MatrixXd x0;                ///< K x J
  std::vector<std::string> labels;   ///< K row names
  Eigen::VectorXd v;                 ///< K, nonnegative, sums to 1

  int num_rows() const { return static_cast<int>(x1.size()); }
  int num_donors() const { return static_cast<int>(x0.cols()); }
};

/// What goes into the design. Rows are ordered: covariates first, then the
/// outcome combinations. Each combination is a t0-length coefficient vector
/// applied to the pre-period outcomes of every unit.
struct PredictorSpec {
  std::vector<std::string> covariates;             ///< names of panel covariate rows
  std::vector<std::vector<double>> combinations;   ///< explicit combinations
  std::vector<std::string> combination_labels;     ///< optional, parallel to combinations
  bool all_pre_outcomes = false;  ///< append one identity combination per pre-period
  bool pre_period_mean = false;   ///< append the pre-period average combination
  std::vector<double> v;          ///< predictor weights; empty = uniform
};

DesignPair build_design(const Panel& panel, const PredictorSpec& spec);

/// Identity combinations over all pre-period outcomes, uniform v, no covariates.
DesignPair outcomes_design(const Panel& panel);

}  // namespace synth
