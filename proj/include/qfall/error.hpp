#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qfall {

enum class ErrorCode {
  InvalidArgument,
  AsymmetricInput,
  TraceNotZero,
  OutsideValidity,
  SymmetryViolation,
  SizeMismatch,
  PacketTooWide,
  VelocityTooHigh,
  AliasRisk,
  StepTooLarge,
  BoundaryContact,
  TooFewRecords,
  NonUniformRecords,
  TimestampMismatch,
  PhaseWrapRisk,
  NotAdjacent,
  TooFewVariants,
  InitialMomentMismatch,
  TooFewPoints,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above; the
// message is prefixed with the code name so it can be grepped from stderr.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qfall
