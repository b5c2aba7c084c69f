#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bridgelab {

enum class ErrorKind {
  InvalidArgument,
  InvalidGrid,
  NonFiniteIntegrand,
  ToleranceNotMet,
  DegenerateTransition,
  InvalidSigma,
  InvalidC,
  AlphaLimitNotOne,
  DerivativeUnavailable,
  GridBeyondHorizon,
  DriftBlowup,
  HorizonMismatch,
  EmptySample,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Numerical kinds map to CLI exit code 3, the rest to 2.
bool is_numerical(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bridgelab
