#pragma once

#include <stdexcept>
#include <string>

namespace motorsim {

enum class ErrorCode {
  NonPositiveRate,
  NegativeRate,
  NonPositiveFirstMoment,
  UnnormalizedDensity,
  QuadratureFailure,
  DegenerateRate,
  RegimeError,
  InsufficientData,
  DomainOverflow,
  ZeroVelocity,
  OverflowRisk,
  DivergentMoment,
  StepFailure,
  ConfigError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace motorsim
