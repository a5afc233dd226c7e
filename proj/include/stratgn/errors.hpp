#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace stratgn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dense eigensolver or factorization did not converge.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double norm, int order)
      : Error(what), norm_(norm), order_(order) {}

  double norm() const { return norm_; }
  int order() const { return order_; }

 private:
  double norm_;
  int order_;
};

/// A matrix passed as a tangent direction has a nonzero ββ block.
class TangencyViolation : public Error {
 public:
  TangencyViolation(double beta_block_norm, double direction_norm)
      : Error("direction is not tangent to the stratum: ||(P^T H P)_bb|| = " +
              std::to_string(beta_block_norm)),
        beta_block_norm_(beta_block_norm),
        direction_norm_(direction_norm) {}

  double beta_block_norm() const { return beta_block_norm_; }
  double direction_norm() const { return direction_norm_; }

 private:
  double beta_block_norm_;
  double direction_norm_;
};

/// Malformed problem, point, or configuration input. `field()` names the
/// offending entry using a dotted path such as "constraint.A[2]".
class InputError : public Error {
 public:
  InputError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// An identity guaranteed by the theory failed numerically (for instance a
/// vanishing normal-step denominator with a nonzero normal direction).
class NumericalInconsistency : public Error {
 public:
  using Error::Error;
};

/// The Levenberg-Marquardt system could not be factorized after all retries.
class LinearSolveFailure : public Error {
 public:
  using Error::Error;
};

/// A randomized fixture generator exhausted its retry budget.
class ConstructionFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace stratgn
