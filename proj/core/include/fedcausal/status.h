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
// Error type shared by every fedcausal module.

#ifndef FEDCAUSAL_STATUS_H_
#define FEDCAUSAL_STATUS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fedcausal {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kRankDeficient,
  kSeparated,
  kMissingClass,
  kNoConvergence,
  kSingularJacobian,
  kEmptySample,
  kTooFewUnits,
  kMissingTarget,
  kZeroVariance,
  kAllSourcesFailed,
  kPrivacyViolation,
  kSchemaError,
  kDataError,
};

std::string_view ErrorCodeName(ErrorCode code);

class FedError : public std::runtime_error {
 public:
  FedError(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fedcausal

#endif  // FEDCAUSAL_STATUS_H_
