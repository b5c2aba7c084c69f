#include "bridgelab/errors.hpp"

namespace bridgelab {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::NonFiniteIntegrand: return "NonFiniteIntegrand";
    case ErrorKind::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorKind::DegenerateTransition: return "DegenerateTransition";
    case ErrorKind::InvalidSigma: return "InvalidSigma";
    case ErrorKind::InvalidC: return "InvalidC";
    case ErrorKind::AlphaLimitNotOne: return "AlphaLimitNotOne";
    case ErrorKind::DerivativeUnavailable: return "DerivativeUnavailable";
    case ErrorKind::GridBeyondHorizon: return "GridBeyondHorizon";
    case ErrorKind::DriftBlowup: return "DriftBlowup";
    case ErrorKind::HorizonMismatch: return "HorizonMismatch";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonFiniteIntegrand:
    case ErrorKind::ToleranceNotMet:
    case ErrorKind::DegenerateTransition:
    case ErrorKind::DerivativeUnavailable:
    case ErrorKind::DriftBlowup:
      return true;
    default:
      return false;
  }
}

}  // namespace bridgelab
