#ifndef GOODDEAL_ERRORS_HPP
#define GOODDEAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gooddeal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model, generator, grid, claim or kernel input.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// The requested good-deal bound is below the minimal admissible bound.
class InfeasibleBoundError : public Error {
 public:
  InfeasibleBoundError(std::string message, double bound, double minimal_bound);

  /// Standard "B below B0" error, optionally prefixed with a context label.
  static InfeasibleBoundError below_minimum(const std::string& context, double bound,
                                            double minimal_bound);

  double bound() const noexcept { return bound_; }
  double minimal_bound() const noexcept { return minimal_bound_; }

 private:
  double bound_;
  double minimal_bound_;
};

/// Numerical failure inside the PIDE engine (non-convergence, singular system).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gooddeal

#endif  // GOODDEAL_ERRORS_HPP
