#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace netrecon {

/// Base class for all errors thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct UnstableSystemError : Error {
  using Error::Error;
};

struct SingularEvaluationError : Error {
  using Error::Error;
};

/// The generalized Lyapunov recursion has no stationary solution
/// (spectral radius of E[A (x) A] is not below one).
struct NoStationarySolutionError : Error {
  using Error::Error;
};

struct EnumerationCapError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

/// Per-frequency inversion failed; carries the offending angles.
struct SingularFrequencyError : Error {
  std::vector<double> frequencies;

  SingularFrequencyError(const std::string& what, std::vector<double> freqs)
      : Error(what), frequencies(std::move(freqs)) {}
};

}  // namespace netrecon
