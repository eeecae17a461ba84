// Copyright 2026 The boxscreen Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace boxscreen {

enum class ErrorCode {
  kInvalidProblem,
  kDimensionMismatch,
  kInfeasiblePoint,
  kWrongVariant,
  kNotInterior,
  kNoInteriorPoint,
  kSingularGram,
  kNegativeGap,
  kInconsistentGap,
  kIndexOutOfPreserved,
  kSingularSubproblem,
  kStepSizeTooLarge,
  kInvalidConfig,
  kParseError,
  kZeroColumn,
  kBadSpec,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidProblem: return "InvalidProblem";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInfeasiblePoint: return "InfeasiblePoint";
    case ErrorCode::kWrongVariant: return "WrongVariant";
    case ErrorCode::kNotInterior: return "NotInterior";
    case ErrorCode::kNoInteriorPoint: return "NoInteriorPoint";
    case ErrorCode::kSingularGram: return "SingularGram";
    case ErrorCode::kNegativeGap: return "NegativeGap";
    case ErrorCode::kInconsistentGap: return "InconsistentGap";
    case ErrorCode::kIndexOutOfPreserved: return "IndexOutOfPreserved";
    case ErrorCode::kSingularSubproblem: return "SingularSubproblem";
    case ErrorCode::kStepSizeTooLarge: return "StepSizeTooLarge";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kZeroColumn: return "ZeroColumn";
    case ErrorCode::kBadSpec: return "BadSpec";
  }
  return "Unknown";
}

// Errors raised by the numerical core, as opposed to malformed input.
constexpr bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotInterior:
    case ErrorCode::kNoInteriorPoint:
    case ErrorCode::kSingularGram:
    case ErrorCode::kNegativeGap:
    case ErrorCode::kInconsistentGap:
    case ErrorCode::kSingularSubproblem:
    case ErrorCode::kStepSizeTooLarge:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace boxscreen
