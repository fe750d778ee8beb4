#include "synth/kde.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "synth/errors.hpp"
#include "synth/stats.hpp"

namespace synth {

DensityEstimate kde(std::span<const double> samples, int grid_points) {
  if (samples.size() < 10)
    throw DegenerateError("kde needs at least 10 samples");
  if (grid_points < 2) throw ConfigError("kde needs at least 2 grid points");

  const double sd = stats::sample_sd(samples);
  if (!(sd > 0.0)) throw DegenerateError("kde needs positive sample variance");
  const double iqr = stats::iqr(samples);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  const double n = static_cast<double>(samples.size());
  const double h = 0.9 * spread * std::pow(n, -0.2);

  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it - 3.0 * h;
  const double hi = *hi_it + 3.0 * h;

  DensityEstimate density;
  density.bandwidth = h;
  density.grid.setLinSpaced(grid_points, lo, hi);
  density.values.setZero(grid_points);
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * M_PI));
  for (int g = 0; g < grid_points; ++g) {
    double acc = 0.0;
    for (double x : samples) {
      const double z = (density.grid(g) - x) / h;
      acc += std::exp(-0.5 * z * z);
    }
    density.values(g) = norm * acc;
  }
  return density;
}

namespace {

double interpolate(const DensityEstimate& d, double x) {
  const auto n = d.grid.size();
  if (x < d.grid(0) || x > d.grid(n - 1)) return 0.0;
  const double* begin = d.grid.data();
  const double* pos = std::upper_bound(begin, begin + n, x);
  auto idx = pos - begin;
  if (idx <= 0) return d.values(0);
  if (idx >= n) return d.values(n - 1);
  const double x0 = d.grid(idx - 1), x1 = d.grid(idx);
  const double t = (x1 > x0) ? (x - x0) / (x1 - x0) : 0.0;
  return (1.0 - t) * d.values(idx - 1) + t * d.values(idx);
}

}  // namespace

double tv_distance(const DensityEstimate& f, const DensityEstimate& g) {
  std::vector<double> knots;
  knots.reserve(2 * (f.grid.size() + g.grid.size()));
  knots.insert(knots.end(), f.grid.data(), f.grid.data() + f.grid.size());
  knots.insert(knots.end(), g.grid.data(), g.grid.data() + g.grid.size());
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  std::vector<double> refined;
  refined.reserve(2 * knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i) {
    refined.push_back(knots[i]);
    if (i + 1 < knots.size()) refined.push_back(0.5 * (knots[i] + knots[i + 1]));
  }

  double integral = 0.0;
  double prev_x = refined.front();
  double prev_diff = std::abs(interpolate(f, prev_x) - interpolate(g, prev_x));
  for (std::size_t i = 1; i < refined.size(); ++i) {
    const double x = refined[i];
    const double diff = std::abs(interpolate(f, x) - interpolate(g, x));
    integral += 0.5 * (prev_diff + diff) * (x - prev_x);
    prev_x = x;
    prev_diff = diff;
  }
  return std::clamp(0.5 * integral, 0.0, 1.0);
}

}  // namespace synth
