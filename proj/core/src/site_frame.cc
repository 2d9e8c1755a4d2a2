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

#include "fedcausal/site_frame.h"

#include <string>

#include "fedcausal/status.h"

namespace fedcausal {

std::string_view SiteRoleName(SiteRole role) {
  return role == SiteRole::kTarget ? "target" : "source";
}

Matrix SiteFrame::SharedCovariates() const {
  Matrix v(x.rows(), static_cast<Eigen::Index>(shared_cols.size()));
  for (size_t c = 0; c < shared_cols.size(); ++c) {
    v.col(static_cast<Eigen::Index>(c)) = x.col(shared_cols[c]);
  }
  return v;
}

void SiteFrame::Validate() const {
  const Eigen::Index n = y.size();
  if (n < 1) {
    throw FedError(ErrorCode::kEmptySample, "site " + site_id + " is empty");
  }
  if (a.size() != n || x.rows() != n) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "site " + site_id + " has inconsistent lengths");
  }
  if (shared_cols.empty()) {
    throw FedError(ErrorCode::kInvalidArgument,
                   "site " + site_id + " has no shared covariates");
  }
  for (const int c : shared_cols) {
    if (c < 0 || c >= x.cols()) {
      throw FedError(ErrorCode::kInvalidArgument,
                     "site " + site_id + " shared column out of range");
    }
  }
  if (role == SiteRole::kTarget &&
      static_cast<Eigen::Index>(shared_cols.size()) != x.cols()) {
    throw FedError(ErrorCode::kInvalidArgument,
                   "target covariates must be restricted to the shared set");
  }
  if (!y.allFinite() || !x.allFinite()) {
    throw FedError(ErrorCode::kInvalidArgument,
                   "site " + site_id + " has non-finite values");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a[i] != 0.0 && a[i] != 1.0) {
      throw FedError(ErrorCode::kDataError,
                     "site " + site_id + " treatment is not binary");
    }
  }
}

std::vector<int> ArmIndices(const SiteFrame& frame, int arm) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < frame.a.size(); ++i) {
    if (static_cast<int>(frame.a[i]) == arm) out.push_back(static_cast<int>(i));
  }
  return out;
}

Matrix SelectRows(const Matrix& m, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  }
  return out;
}

Vector SelectRows(const Vector& v, const std::vector<int>& rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    out[static_cast<Eigen::Index>(r)] = v[rows[r]];
  }
  return out;
}

}  // namespace fedcausal
