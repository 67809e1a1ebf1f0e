#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace necklace {

enum class ErrorCode {
  InvalidInput,
  AsymmetricCondition,
  SingularConversion,
  NonUnitaryInput,
  BelowThreshold,
  MultiMode,
  LoopSingular,
  TransferPole,
  OutsideBand,
  BandEdge,
  SingularSystem,
  NoRoot,
  Degenerate,
  TangentDirection,
  Indeterminate,
  VerificationMismatch,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Errors that come from bad user input rather than from the numerics.
// The CLI maps these to exit code 2, everything else to exit code 1.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace necklace
