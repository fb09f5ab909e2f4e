// SPDX-License-Identifier: Apache-2.0
#include "meshtri/error.hpp"

namespace meshtri {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::InvalidRotation: return "InvalidRotation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::TargetTooSmall: return "TargetTooSmall";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::InvalidSigma: return "InvalidSigma";
    case ErrorCode::EmptyViewList: return "EmptyViewList";
    case ErrorCode::GateOutOfRange: return "GateOutOfRange";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonFiniteCost: return "NonFiniteCost";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
  }
  return "Unknown";
}

}  // namespace meshtri
