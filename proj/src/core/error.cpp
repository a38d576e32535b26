#include "ssde/error.hpp"

namespace ssde {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularPoint: return "SingularPoint";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidDimension: return "InvalidDimension";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularOnGrid: return "SingularOnGrid";
    case ErrorKind::MixedClasses: return "MixedClasses";
    case ErrorKind::MixedLambda: return "MixedLambda";
    case ErrorKind::UnsupportedAnalytic: return "UnsupportedAnalytic";
    case ErrorKind::NegativeBound: return "NegativeBound";
    case ErrorKind::EmptyGrid: return "EmptyGrid";
    case ErrorKind::UnderResolved: return "UnderResolved";
    case ErrorKind::ExtentTooSmall: return "ExtentTooSmall";
    case ErrorKind::NonPSDMatrix: return "NonPSDMatrix";
    case ErrorKind::SolverDiverged: return "SolverDiverged";
    case ErrorKind::MuTooSmall: return "MuTooSmall";
    case ErrorKind::FitIllConditioned: return "FitIllConditioned";
    case ErrorKind::WeightInvalid: return "WeightInvalid";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::SeriesDivergence: return "SeriesDivergence";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::BadStep: return "BadStep";
    case ErrorKind::MismatchedVariant: return "MismatchedVariant";
    case ErrorKind::BoxMismatch: return "BoxMismatch";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::StageFailed: return "StageFailed";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace ssde
