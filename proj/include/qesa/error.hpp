#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace qesa {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix dimensions disagree with the model they are used with.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A precondition on an argument value was violated (k <= 0, T <= 0, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Malformed instance file or schema violation.
class ParseError : public Error {
public:
  using Error::Error;
};

/// An exhaustive method was asked to enumerate more than its hard cap.
class SizeCapError : public Error {
public:
  using Error::Error;
};

/// Failure reported by a sampler while running the annealing loop. The
/// original sampler exception is nested. step() is empty for the initial
/// corner solve.
class SolveError : public Error {
public:
  SolveError(std::optional<std::size_t> step, const std::string& what)
      : Error("sampler failed " + (step ? "at step " + std::to_string(*step) : std::string("during initialization")) +
              ": " + what),
        step_(step) {}

  [[nodiscard]] std::optional<std::size_t> step() const noexcept { return step_; }

private:
  std::optional<std::size_t> step_;
};

inline void require_dim(std::size_t expected, std::size_t actual, const char* what) {
  if (expected != actual) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                         ", got " + std::to_string(actual));
  }
}

}  // namespace qesa
