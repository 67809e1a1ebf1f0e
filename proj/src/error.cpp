#include "necklace/error.hpp"

namespace necklace {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::AsymmetricCondition: return "AsymmetricCondition";
    case ErrorCode::SingularConversion: return "SingularConversion";
    case ErrorCode::NonUnitaryInput: return "NonUnitaryInput";
    case ErrorCode::BelowThreshold: return "BelowThreshold";
    case ErrorCode::MultiMode: return "MultiMode";
    case ErrorCode::LoopSingular: return "LoopSingular";
    case ErrorCode::TransferPole: return "TransferPole";
    case ErrorCode::OutsideBand: return "OutsideBand";
    case ErrorCode::BandEdge: return "BandEdge";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::TangentDirection: return "TangentDirection";
    case ErrorCode::Indeterminate: return "Indeterminate";
    case ErrorCode::VerificationMismatch: return "VerificationMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::AsymmetricCondition:
    case ErrorCode::Degenerate:
    case ErrorCode::ConfigError:
      return true;
    default:
      return false;
  }
}

}  // namespace necklace
