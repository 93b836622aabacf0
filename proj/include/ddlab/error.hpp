#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ddlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument, shape mismatch or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Numerical linear algebra failure (asymmetric input, zero matrix, ...).
class LinalgError : public Error {
 public:
  using Error::Error;
};

/// A zero (or numerically zero) PSD matrix: the smallest positive eigenvalue is undefined.
class ZeroMatrixError : public LinalgError {
 public:
  using LinalgError::LinalgError;
};

/// An iterative procedure produced a non-finite value.
class DivergenceError : public Error {
 public:
  DivergenceError(std::int64_t step, const std::string& what)
      : Error(what + " (first non-finite value at step " + std::to_string(step) + ")"),
        step_(step) {}

  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

/// Malformed input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddlab
