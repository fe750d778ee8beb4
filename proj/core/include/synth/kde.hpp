#pragma once

#include <Eigen/Dense>
#include <span>

namespace synth {

/// Gaussian kernel density evaluated on a regular grid.
struct DensityEstimate {
  Eigen::VectorXd grid;
  Eigen::VectorXd values;
  double bandwidth = 0.0;
};

/// Silverman bandwidth 0.9 * min(sd, IQR/1.34) * n^{-1/5} (sd fallback when
/// the IQR is zero); grid spans [min - 3h, max + 3h]. Needs at least 10
/// samples with positive variance, otherwise DegenerateError.
DensityEstimate kde(std::span<const double> samples, int grid_points = 512);

/// Total variation distance 0.5 * integral |f - g|, computed by trapezoid on
/// the union of both grids plus midpoints with linear interpolation (zero
/// outside each grid). Symmetric; clamped to [0, 1].
double tv_distance(const DensityEstimate& f, const DensityEstimate& g);

}  // namespace synth
