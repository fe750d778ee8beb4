#pragma once

#include <span>
#include <vector>

namespace synth::stats {

double mean(std::span<const double> xs);

/// Sample standard deviation (n-1 denominator).
double sample_sd(std::span<const double> xs);

/// Type-7 (linear interpolation) quantile of a sorted copy of xs; p in [0,1].
double quantile(std::span<const double> xs, double p);

double median(std::span<const double> xs);

/// Interquartile range, quantile(0.75) - quantile(0.25).
double iqr(std::span<const double> xs);

double pearson(std::span<const double> xs, std::span<const double> ys);

double normal_pdf(double x);
double normal_cdf(double x);

/// Inverse standard normal CDF, p in (0,1). Acklam's rational approximation
/// with one Halley refinement; accurate to full double precision.
double normal_quantile(double p);

/// Ordinary least squares slope of y on x (with intercept).
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace synth::stats
