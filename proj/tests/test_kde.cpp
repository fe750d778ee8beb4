#include <doctest.h>

#include <cmath>
#include <vector>

#include "synth/errors.hpp"
#include "synth/kde.hpp"
#include "synth/rng.hpp"

namespace {

double trapezoid(const synth::DensityEstimate& d) {
  double integral = 0.0;
  for (int i = 1; i < d.grid.size(); ++i)
    integral += 0.5 * (d.values(i) + d.values(i - 1)) * (d.grid(i) - d.grid(i - 1));
  return integral;
}

double value_at(const synth::DensityEstimate& d, double x) {
  int best = 0;
  for (int i = 1; i < d.grid.size(); ++i)
    if (std::abs(d.grid(i) - x) < std::abs(d.grid(best) - x)) best = i;
  return d.values(best);
}

std::vector<double> normal_samples(int n, double mean, std::uint64_t seed) {
  synth::Rng rng(seed, 0);
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = mean + rng.normal();
  return xs;
}

}  // namespace

TEST_CASE("standard normal density at zero") {
  const auto d = synth::kde(normal_samples(100000, 0.0, 1), 801);
  CHECK(value_at(d, 0.0) == doctest::Approx(0.3989).epsilon(0.025));
  CHECK(std::abs(value_at(d, 0.0) - 0.3989) < 0.01);
}

TEST_CASE("translation equivariance") {
  const auto xs = normal_samples(5000, 0.0, 2);
  std::vector<double> shifted = xs;
  for (double& x : shifted) x += 10.0;
  const auto a = synth::kde(xs, 301);
  const auto b = synth::kde(shifted, 301);
  CHECK(a.bandwidth == doctest::Approx(b.bandwidth).epsilon(1e-12));
  for (int i = 0; i < a.grid.size(); ++i) {
    CHECK(b.grid(i) - a.grid(i) == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(b.values(i) == doctest::Approx(a.values(i)).epsilon(1e-9));
  }
}

TEST_CASE("density integrates to about one") {
  synth::Rng rng(3, 0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> xs(500);
    for (auto& x : xs) x = std::exp(rng.normal());  // skewed input
    const auto d = synth::kde(xs, 601);
    CHECK(trapezoid(d) == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("degenerate inputs") {
  std::vector<double> constant(50, 3.0);
  CHECK_THROWS_AS(synth::kde(constant, 100), synth::DegenerateError);
  std::vector<double> few = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(synth::kde(few, 100), synth::DegenerateError);
}

TEST_CASE("tv distance: identity, disjoint, analytic unit-shift value") {
  const auto f = synth::kde(normal_samples(100000, 0.0, 4), 512);
  CHECK(synth::tv_distance(f, f) == doctest::Approx(0.0));

  const auto far = synth::kde(normal_samples(100000, 10.0, 5), 512);
  CHECK(synth::tv_distance(f, far) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(synth::tv_distance(f, far) - 1.0) < 0.02);

  // TV(N(0,1), N(1,1)) = 2 Phi(1/2) - 1 = 0.382925
  const auto near = synth::kde(normal_samples(100000, 1.0, 6), 512);
  CHECK(std::abs(synth::tv_distance(f, near) - 0.3829) < 0.03);
}

TEST_CASE("tv distance is symmetric and satisfies the triangle inequality") {
  const auto a = synth::kde(normal_samples(2000, 0.0, 7), 256);
  const auto b = synth::kde(normal_samples(2000, 0.7, 8), 256);
  const auto c = synth::kde(normal_samples(2000, 1.9, 9), 256);
  CHECK(synth::tv_distance(a, b) == synth::tv_distance(b, a));
  CHECK(synth::tv_distance(a, c) <=
        synth::tv_distance(a, b) + synth::tv_distance(b, c) + 1e-3);
}

TEST_CASE("tv distance is invariant to rescaling both samples") {
  const auto xs = normal_samples(3000, 0.0, 10);
  const auto ys = normal_samples(3000, 0.5, 11);
  std::vector<double> xs3 = xs, ys3 = ys;
  for (double& x : xs3) x *= 3.0;
  for (double& y : ys3) y *= 3.0;
  const double base = synth::tv_distance(synth::kde(xs, 256), synth::kde(ys, 256));
  const double scaled = synth::tv_distance(synth::kde(xs3, 256), synth::kde(ys3, 256));
  CHECK(scaled == doctest::Approx(base).epsilon(1e-6));
}
