#include "synth/simplex_solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "synth/errors.hpp"

namespace synth {

namespace {

// Exact minimizer of f over {w : sum w_S = 1, w_S >= 0, w = 0 off S} via the
// primal active-set method: solve the equality-constrained KKT system on the
// working set, walk toward the solution until a coordinate hits zero, drop
// it, repeat. H and c describe f(w) = w'Hw/2 - c'w + const.
Eigen::VectorXd correct_on_support(const Eigen::MatrixXd& h,
                                   const Eigen::VectorXd& c,
                                   std::vector<int>& support,
                                   Eigen::VectorXd w) {
  const int j = static_cast<int>(w.size());
  for (int guard = 0; guard < 4 * j + 8; ++guard) {
    const int m = static_cast<int>(support.size());
    Eigen::MatrixXd kkt(m + 1, m + 1);
    Eigen::VectorXd rhs(m + 1);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) kkt(a, b) = h(support[a], support[b]);
      kkt(a, m) = 1.0;
      kkt(m, a) = 1.0;
      rhs(a) = c(support[a]);
    }
    kkt(m, m) = 0.0;
    rhs(m) = 1.0;

    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    if (!sol.allFinite()) return w;  // degenerate subproblem; keep iterate

    Eigen::VectorXd target = Eigen::VectorXd::Zero(j);
    for (int a = 0; a < m; ++a) target(support[a]) = sol(a);

    double min_coord = 0.0;
    for (int a = 0; a < m; ++a) min_coord = std::min(min_coord, target(support[a]));
    if (min_coord >= -1e-14 || m == 1) return target;

    // Walk from w toward target until the first coordinate reaches zero.
    double theta = 1.0;
    int blocking = -1;
    for (int a = 0; a < m; ++a) {
      const int idx = support[a];
      const double delta = target(idx) - w(idx);
      if (delta < 0.0) {
        const double candidate = w(idx) / -delta;
        if (candidate < theta) {
          theta = candidate;
          blocking = a;
        }
      }
    }
    if (blocking < 0) return target;
    w += theta * (target - w);
    w(support[blocking]) = 0.0;
    support.erase(support.begin() + blocking);
  }
  return w;
}

}  // namespace

SimplexWeights solve_sc(const DesignPair& design, const SolverOptions& opts) {
  const int j = design.num_donors();
  const int k = design.num_rows();
  if (j < 1) throw ConfigError("design has no donors");
  if (k < 1) throw ConfigError("design has no predictor rows");
  if (!design.x0.allFinite() || !design.x1.allFinite() || !design.v.allFinite())
    throw NumericalError("design contains non-finite values");

  // Scale rows by sqrt(v): f(w) = |A w - b|^2.
  const Eigen::VectorXd sqrt_v = design.v.array().max(0.0).sqrt();
  const Eigen::MatrixXd a = sqrt_v.asDiagonal() * design.x0;
  const Eigen::VectorXd b = sqrt_v.asDiagonal() * design.x1;
  const Eigen::MatrixXd h = 2.0 * (a.transpose() * a);
  const Eigen::VectorXd c = 2.0 * (a.transpose() * b);
  const double b2 = b.squaredNorm();

  auto objective = [&](const Eigen::VectorXd& w) {
    return 0.5 * w.dot(h * w) - c.dot(w) + b2;
  };

  // Start from the single best donor column.
  int best = 0;
  double best_obj = (a.col(0) - b).squaredNorm();
  for (int d = 1; d < j; ++d) {
    const double obj = (a.col(d) - b).squaredNorm();
    if (obj < best_obj) {
      best_obj = obj;
      best = d;
    }
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(j);
  w(best) = 1.0;
  std::vector<int> support = {best};

  const double f0 = objective(w);
  const double gap_tol = opts.relative_gap_tolerance * (1.0 + std::abs(f0));

  double prev_obj = f0;
  double gap = 0.0;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const Eigen::VectorXd grad = h * w - c;
    int vertex = 0;
    double vertex_grad = grad(0);
    for (int d = 1; d < j; ++d)
      if (grad(d) < vertex_grad) {
        vertex_grad = grad(d);
        vertex = d;
      }
    gap = grad.dot(w) - vertex_grad;
    if (gap <= gap_tol) break;

    if (std::find(support.begin(), support.end(), vertex) == support.end())
      support.push_back(vertex);
    w = correct_on_support(h, c, support, w);

    const double obj = objective(w);
    if (obj > prev_obj + 1e-9 * (1.0 + std::abs(prev_obj)))
      throw NumericalError("simplex solver objective increased");
    if (obj >= prev_obj - 1e-18 * (1.0 + std::abs(prev_obj)) && gap > gap_tol) {
      // No progress on this support; take a plain Frank-Wolfe step.
      Eigen::VectorXd direction = -w;
      direction(vertex) += 1.0;
      const double curvature = direction.dot(h * direction);
      double step = curvature > 0.0 ? gap / curvature : 1.0;
      step = std::clamp(step, 0.0, 1.0);
      if (step <= 0.0) break;
      w += step * direction;
    }
    prev_obj = objective(w);
  }

  if (iter >= opts.max_iterations && gap > gap_tol) {
    const Eigen::VectorXd grad = h * w - c;
    throw SolverError("simplex solve did not reach the gap tolerance",
                      std::vector<double>(w.data(), w.data() + w.size()),
                      grad.norm());
  }

  // Clamp solver-level negatives and renormalize.
  for (int d = 0; d < j; ++d) {
    if (w(d) < 0.0) {
      if (w(d) < -1e-12)
        throw NumericalError("simplex solver produced an infeasible weight");
      w(d) = 0.0;
    }
  }
  w /= w.sum();

  SimplexWeights result;
  result.w = w;
  result.objective = std::max(0.0, objective(w));
  result.duality_gap = gap;
  result.iterations = iter;
  return result;
}

}  // namespace synth
