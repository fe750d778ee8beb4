#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace synth {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input data (missing cells, duplicates, unbalanced panels).
class IngestError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-supplied configuration (bad field values, unknown markers, wrong lengths).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Optimizer failed to reach the requested tolerance. Carries the best iterate found.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> best, double grad_norm)
      : Error(what), best_weights(std::move(best)), gradient_norm(grad_norm) {}
  std::vector<double> best_weights;
  double gradient_norm = 0.0;
};

/// Donor matrix is rank deficient.
class RankError : public Error {
 public:
  using Error::Error;
};

/// Not enough pre-treatment observations for the requested fit.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a numerically invalid matrix where a valid one is required.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Degenerate input to a density estimator (e.g. zero-variance sample).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Too many replications of an experiment failed.
class ExperimentError : public Error {
 public:
  using Error::Error;
};

}  // namespace synth
