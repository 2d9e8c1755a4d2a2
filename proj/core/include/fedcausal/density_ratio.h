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
// Exponential-tilt density ratio between the target covariate distribution
// and one source site's covariate distribution,
//
//   zeta(v) = f_target(v) / f_source(v) = exp(-gamma' psi(v)),
//
// fitted by matching the target's basis means. The target only ever hands
// over a MomentSummary, never unit-level rows.

#ifndef FEDCAUSAL_DENSITY_RATIO_H_
#define FEDCAUSAL_DENSITY_RATIO_H_

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "fedcausal/numkit.h"

namespace fedcausal {

enum class BasisKind {
  kLinear,             // psi(v) = (1, v)
  kLinearPlusSquares,  // psi(v) = (1, v, v^2)
};

std::string_view BasisKindName(BasisKind kind);
BasisKind ParseBasisKind(std::string_view name);

struct BasisSpec {
  BasisKind kind = BasisKind::kLinear;
  int dimension = 1;  // includes the leading constant

  static BasisSpec For(BasisKind kind, int covariates);
  // Number of raw covariates the basis expands.
  int covariates() const;

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

// n x d matrix of basis rows; the first column is identically 1.
Matrix ExpandBasis(const Matrix& v, const BasisSpec& basis);

struct MomentSummary {
  std::string site_id;
  long n = 0;
  BasisSpec basis;
  Vector mean_basis;  // first component is 1
};

struct TiltCoefficients {
  Vector gamma;
  BasisSpec basis;
  double residual_norm = 0.0;  // max-norm of the moment residual at gamma
};

// Componentwise sample mean of psi(V) over target units.
MomentSummary TargetMoments(const Matrix& v_target, const BasisSpec& basis,
                            std::string site_id = "target");

// Moment residual target_mean - (1/n) sum_i psi(v_i) exp(-gamma' psi(v_i)).
Vector TiltResidual(const Matrix& source_basis, const Vector& target_mean,
                    const Vector& gamma);

inline constexpr double kTiltTolerance = 1e-10;

// Solves the moment equations by damped Newton from gamma = 0. Throws
// kNoConvergence when no solution is reachable (typically non-overlapping
// supports) and kSingularJacobian on a degenerate source design.
TiltCoefficients SolveTilt(const Matrix& source_v,
                           const MomentSummary& target_summary,
                           const BasisSpec& basis,
                           double tol = kTiltTolerance,
                           const SolverOptions& options = {});

// exp(-gamma' psi(v_i)) for every source unit.
Vector RatioWeights(const TiltCoefficients& coeffs, const Matrix& source_v);

// Wire format: {site_id, n, basis: {kind, d}, mean_basis: [...]}.
nlohmann::json ToJson(const BasisSpec& basis);
BasisSpec BasisSpecFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const MomentSummary& summary);
MomentSummary MomentSummaryFromJson(const nlohmann::json& j);

}  // namespace fedcausal

#endif  // FEDCAUSAL_DENSITY_RATIO_H_
