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
// Shared fixtures for unit tests.

#ifndef FEDCAUSAL_TESTS_TEST_UTIL_H_
#define FEDCAUSAL_TESTS_TEST_UTIL_H_

#include <string>
#include <vector>

#include "fedcausal/numkit.h"
#include "fedcausal/rng.h"
#include "fedcausal/site_frame.h"
#include "oracles.h"

namespace fedcausal::testing {

inline Matrix RandomNormal(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = StandardNormal(rng);
  }
  return m;
}

inline Rows ToRows(const Matrix& m) {
  Rows out(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  }
  return out;
}

inline std::vector<double> ToStd(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// Randomized frame with A ~ Bernoulli(expit(x' alpha)) and
// Y = 1 + x' beta + N(0, 1). Covariates are N(shift, 1).
inline SiteFrame SyntheticFrame(const std::string& id, SiteRole role, int n,
                                const Vector& beta, const Vector& alpha,
                                double shift, std::uint64_t seed) {
  Rng rng = MakeRng(seed, {0});
  SiteFrame f;
  f.site_id = id;
  f.role = role;
  const int p = static_cast<int>(beta.size());
  f.x = RandomNormal(n, p, rng).array() + shift;
  f.y.resize(n);
  f.a.resize(n);
  for (int i = 0; i < n; ++i) {
    const double pi = Expit(f.x.row(i).dot(alpha));
    f.a[i] = UniformUnit(rng) < pi ? 1.0 : 0.0;
    f.y[i] = 1.0 + f.x.row(i).dot(beta) + StandardNormal(rng);
  }
  for (int c = 0; c < p; ++c) f.shared_cols.push_back(c);
  return f;
}

}  // namespace fedcausal::testing

#endif  // FEDCAUSAL_TESTS_TEST_UTIL_H_
