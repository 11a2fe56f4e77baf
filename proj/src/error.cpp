#include "qfall/error.hpp"

namespace qfall {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::TraceNotZero: return "TraceNotZero";
    case ErrorCode::OutsideValidity: return "OutsideValidity";
    case ErrorCode::SymmetryViolation: return "SymmetryViolation";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::PacketTooWide: return "PacketTooWide";
    case ErrorCode::VelocityTooHigh: return "VelocityTooHigh";
    case ErrorCode::AliasRisk: return "AliasRisk";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::BoundaryContact: return "BoundaryContact";
    case ErrorCode::TooFewRecords: return "TooFewRecords";
    case ErrorCode::NonUniformRecords: return "NonUniformRecords";
    case ErrorCode::TimestampMismatch: return "TimestampMismatch";
    case ErrorCode::PhaseWrapRisk: return "PhaseWrapRisk";
    case ErrorCode::NotAdjacent: return "NotAdjacent";
    case ErrorCode::TooFewVariants: return "TooFewVariants";
    case ErrorCode::InitialMomentMismatch: return "InitialMomentMismatch";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace qfall
