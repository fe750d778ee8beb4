#include "synth/mle.hpp"

#include <cmath>

#include "synth/errors.hpp"
#include "synth/stats.hpp"

namespace synth {

MleFit fit_mle(const Panel& panel) {
  panel.validate();
  const int t0 = panel.t0;
  const int j = panel.num_donors();
  if (t0 <= j)
    throw InsufficientDataError("pre-period length " + std::to_string(t0) +
                                " must exceed donor count " + std::to_string(j));

  const Eigen::VectorXd y1 = panel.outcomes.col(0).head(t0);
  const Eigen::MatrixXd yj = panel.outcomes.topRows(t0).rightCols(j);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(yj);
  qr.setThreshold(1e-10);
  if (qr.rank() < j) throw RankError("donor outcome matrix is rank deficient");

  MleFit fit;
  fit.t0 = t0;
  fit.w_hat = qr.solve(y1);

  const Eigen::VectorXd residuals = y1 - yj * fit.w_hat;
  fit.sigma_sq_hat = residuals.squaredNorm() / static_cast<double>(t0);
  fit.loglik = -0.5 * std::log(2.0 * M_PI * fit.sigma_sq_hat) - 0.5;

  const Eigen::MatrixXd d_hat = (yj.transpose() * yj) / static_cast<double>(t0);
  fit.vcov = fit.sigma_sq_hat * d_hat.ldlt().solve(Eigen::MatrixXd::Identity(j, j));
  fit.vcov = 0.5 * (fit.vcov + fit.vcov.transpose()).eval();  // exact symmetry
  return fit;
}

std::pair<double, double> wald_interval(const MleFit& fit,
                                        const Eigen::VectorXd& contrast,
                                        double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0,1)");
  if (contrast.size() != fit.w_hat.size())
    throw ConfigError("contrast length does not match weight vector");
  if (!contrast.allFinite()) throw NumericalError("contrast has non-finite entries");
  if (!fit.vcov.allFinite()) throw NumericalError("vcov has non-finite entries");

  const double variance = contrast.dot(fit.vcov * contrast);
  if (variance < -1e-12 * (1.0 + contrast.squaredNorm()))
    throw NumericalError("vcov is not positive semi-definite for this contrast");

  const double center = contrast.dot(fit.w_hat);
  const double z = stats::normal_quantile(0.5 + 0.5 * level);
  const double half_width =
      z * std::sqrt(std::max(0.0, variance) / static_cast<double>(fit.t0));
  return {center - half_width, center + half_width};
}

}  // namespace synth
