#pragma once

#include <Eigen/Dense>

#include "synth/design.hpp"

namespace synth {

struct SolverOptions {
  int max_iterations = 100000;
  /// Converged when the Frank-Wolfe duality gap falls below
  /// tolerance * (1 + initial objective).
  double relative_gap_tolerance = 1e-10;
};

/// Simplex-feasible weights minimizing the V-weighted squared loss
/// |x1 - X0 w|_V^2. Entries are exactly nonnegative (values in
/// (-1e-12, 0) from the solve are clamped and the vector renormalized).
struct SimplexWeights {
  Eigen::VectorXd w;
  double objective = 0.0;    ///< V-weighted squared loss at w
  double duality_gap = 0.0;  ///< final Frank-Wolfe gap
  int iterations = 0;

  double distance() const { return std::sqrt(std::max(0.0, objective)); }
};

/// Fully-corrective Frank-Wolfe for the convex quadratic over the simplex:
/// each iteration adds the steepest vertex, then re-optimizes exactly over
/// the active support (equality-constrained KKT solve with active-set
/// pivoting). Deterministic; ties break to the lowest donor index. The
/// objective is non-increasing across iterations. When donor columns are
/// collinear the minimizer may be non-unique; the returned iterate is the
/// one the method converges to.
///
/// Throws SolverError (carrying the best iterate and gradient norm) if the
/// gap tolerance is not reached within max_iterations.
SimplexWeights solve_sc(const DesignPair& design, const SolverOptions& opts = {});

}  // namespace synth
