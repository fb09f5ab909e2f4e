// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace meshtri {

enum class ErrorCode {
  InvalidArgument = 1,
  DimensionMismatch,
  ShapeMismatch,
  NonPositiveDepth,
  InvalidDimension,
  DegenerateInput,
  InvalidRotation,
  ParseError,
  InvariantViolation,
  IoError,
  TargetTooSmall,
  NotNormalized,
  InvalidSigma,
  EmptyViewList,
  GateOutOfRange,
  IndexOutOfRange,
  NonFiniteCost,
  InvalidConfig,
  LengthMismatch,
};

const char* error_code_name(ErrorCode code) noexcept;

/// Exception type thrown by every module. The code is what the C layer
/// reports; the message carries the context (field, line, index).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace meshtri
