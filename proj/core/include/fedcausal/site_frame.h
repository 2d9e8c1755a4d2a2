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
// One site's individual-level data. A SiteFrame never leaves its site.

#ifndef FEDCAUSAL_SITE_FRAME_H_
#define FEDCAUSAL_SITE_FRAME_H_

#include <string>
#include <string_view>
#include <vector>

#include "fedcausal/numkit.h"

namespace fedcausal {

enum class SiteRole { kTarget, kSource };

std::string_view SiteRoleName(SiteRole role);

struct SiteFrame {
  std::string site_id;
  SiteRole role = SiteRole::kSource;
  Vector y;
  Vector a;  // binary treatment, 0/1
  Matrix x;  // covariates without an intercept column
  // Columns of x that are observed at the target, in the target's column
  // order. For the target itself this is every column.
  std::vector<int> shared_cols;

  Eigen::Index size() const { return y.size(); }

  // The shared covariates V as an n x |shared_cols| matrix.
  Matrix SharedCovariates() const;

  // Throws kInvalidArgument / kDimensionMismatch on malformed frames and
  // kDataError when the treatment is not binary.
  void Validate() const;
};

// Units with A == arm.
std::vector<int> ArmIndices(const SiteFrame& frame, int arm);

Matrix SelectRows(const Matrix& m, const std::vector<int>& rows);
Vector SelectRows(const Vector& v, const std::vector<int>& rows);

}  // namespace fedcausal

#endif  // FEDCAUSAL_SITE_FRAME_H_
