/*
* Copyright 2026 The fedcausal Authors.
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     https://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
* ============================================================================
*/

#include "fedcausal/status.h"

#include <string>

namespace fedcausal {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kSeparated: return "Separated";
    case ErrorCode::kMissingClass: return "MissingClass";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kSingularJacobian: return "SingularJacobian";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kTooFewUnits: return "TooFewUnits";
    case ErrorCode::kMissingTarget: return "MissingTarget";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kAllSourcesFailed: return "AllSourcesFailed";
    case ErrorCode::kPrivacyViolation: return "PrivacyViolation";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kDataError: return "DataError";
  }
  return "Unknown";
}

FedError::FedError(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace fedcausal
