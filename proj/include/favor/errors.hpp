#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace favor {

// Base of every error raised by the library. Callers that only need to know
// "the computation failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violations: bad sizes, zero dimensions, out-of-range options.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(std::size_t row, double residual)
      : Error("gram_schmidt_directions: row " + std::to_string(row) +
              " is linearly dependent on the rows above it (residual norm " +
              std::to_string(residual) + ")"),
        row_(row),
        residual_(residual) {}

  std::size_t row() const { return row_; }
  double residual() const { return residual_; }

 private:
  std::size_t row_;
  double residual_;
};

// A value left the finite 64-bit range (exp overflow, NaN propagation).
class OverflowError : public Error {
 public:
  using Error::Error;
};

// buf4 + stabilizer <= 0 for some row: the attention renormalizer cannot be
// inverted. Reachable with sign-indefinite feature maps.
class NonPositiveRenormalizerError : public Error {
 public:
  NonPositiveRenormalizerError(std::string variant, std::size_t row, double value)
      : Error("NONPOSITIVE_RENORMALIZER: variant " + variant + ", row " + std::to_string(row) +
              ", renormalizer " + std::to_string(value)),
        variant_(std::move(variant)),
        row_(row),
        value_(value) {}

  const std::string& variant() const { return variant_; }
  std::size_t row() const { return row_; }
  double value() const { return value_; }

 private:
  std::string variant_;
  std::size_t row_;
  double value_;
};

// Refusal to allocate past a configured size cap.
class ResourceGuardError : public Error {
 public:
  using Error::Error;
};

// Iterative evaluation failed to meet its tolerance within the term budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace favor
