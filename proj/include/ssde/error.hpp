#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ssde {

/// Failure categories raised across the library. Each maps to one named
/// error of the module contracts; callers dispatch on kind(), not on text.
enum class ErrorKind {
  SingularPoint,
  DimensionMismatch,
  InvalidDimension,
  InvalidArgument,
  NoConvergence,
  SingularOnGrid,
  MixedClasses,
  MixedLambda,
  UnsupportedAnalytic,
  NegativeBound,
  EmptyGrid,
  UnderResolved,
  ExtentTooSmall,
  NonPSDMatrix,
  SolverDiverged,
  MuTooSmall,
  FitIllConditioned,
  WeightInvalid,
  GridMismatch,
  SeriesDivergence,
  PreconditionViolated,
  NonFiniteState,
  BadStep,
  MismatchedVariant,
  BoxMismatch,
  ConfigInvalid,
  StageFailed,
  IoError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ssde
