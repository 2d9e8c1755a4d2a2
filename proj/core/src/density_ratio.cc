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

#include "fedcausal/density_ratio.h"

#include <cmath>
#include <string>
#include <vector>

#include "fedcausal/status.h"

namespace fedcausal {

std::string_view BasisKindName(BasisKind kind) {
  switch (kind) {
    case BasisKind::kLinear: return "linear";
    case BasisKind::kLinearPlusSquares: return "linear_plus_squares";
  }
  return "linear";
}

BasisKind ParseBasisKind(std::string_view name) {
  if (name == "linear") return BasisKind::kLinear;
  if (name == "linear_plus_squares") return BasisKind::kLinearPlusSquares;
  throw FedError(ErrorCode::kSchemaError,
                 "unknown basis kind '" + std::string(name) + "'");
}

BasisSpec BasisSpec::For(BasisKind kind, int covariates) {
  if (covariates < 0) {
    throw FedError(ErrorCode::kInvalidArgument, "negative covariate count");
  }
  BasisSpec spec;
  spec.kind = kind;
  spec.dimension = kind == BasisKind::kLinear ? 1 + covariates
                                              : 1 + 2 * covariates;
  return spec;
}

int BasisSpec::covariates() const {
  return kind == BasisKind::kLinear ? dimension - 1 : (dimension - 1) / 2;
}

Matrix ExpandBasis(const Matrix& v, const BasisSpec& basis) {
  const Eigen::Index q = v.cols();
  if (BasisSpec::For(basis.kind, static_cast<int>(q)).dimension !=
      basis.dimension) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "basis dimension does not match covariate count");
  }
  Matrix out(v.rows(), basis.dimension);
  out.col(0).setOnes();
  out.middleCols(1, q) = v;
  if (basis.kind == BasisKind::kLinearPlusSquares) {
    out.rightCols(q) = v.array().square().matrix();
  }
  return out;
}

MomentSummary TargetMoments(const Matrix& v_target, const BasisSpec& basis,
                            std::string site_id) {
  if (v_target.rows() < 1) {
    throw FedError(ErrorCode::kEmptySample, "target sample is empty");
  }
  const Matrix psi = ExpandBasis(v_target, basis);
  MomentSummary summary;
  summary.site_id = std::move(site_id);
  summary.n = static_cast<long>(v_target.rows());
  summary.basis = basis;
  summary.mean_basis.resize(basis.dimension);
  for (Eigen::Index c = 0; c < psi.cols(); ++c) {
    const Vector column = psi.col(c);
    summary.mean_basis[c] = CompensatedMean(column);
  }
  return summary;
}

Vector TiltResidual(const Matrix& source_basis, const Vector& target_mean,
                    const Vector& gamma) {
  const Vector w = (-(source_basis * gamma)).array().exp().matrix();
  return target_mean -
         source_basis.transpose() * w / static_cast<double>(source_basis.rows());
}

TiltCoefficients SolveTilt(const Matrix& source_v,
                           const MomentSummary& target_summary,
                           const BasisSpec& basis, double tol,
                           const SolverOptions& options) {
  if (!(target_summary.basis == basis)) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "target summary was built with a different basis");
  }
  if (target_summary.mean_basis.size() != basis.dimension) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "target summary length does not match basis");
  }
  if (source_v.rows() == 0) {
    throw FedError(ErrorCode::kEmptySample, "source sample is empty");
  }
  if (source_v.rows() < basis.dimension) {
    throw FedError(ErrorCode::kTooFewUnits,
                   "source sample smaller than basis dimension");
  }
  const Matrix psi = ExpandBasis(source_v, basis);
  const Vector& target_mean = target_summary.mean_basis;
  const double inv_n = 1.0 / static_cast<double>(psi.rows());

  auto residual = [&](const Vector& gamma) {
    return TiltResidual(psi, target_mean, gamma);
  };
  auto jacobian = [&](const Vector& gamma) {
    const Vector w = (-(psi * gamma)).array().exp().matrix();
    Matrix j = psi.transpose() * w.asDiagonal() * psi;
    j *= inv_n;
    return j;
  };

  TiltCoefficients out;
  out.basis = basis;
  out.gamma = NewtonSolve(residual, jacobian, Vector::Zero(basis.dimension),
                          tol, options);
  out.residual_norm = residual(out.gamma).lpNorm<Eigen::Infinity>();
  return out;
}

Vector RatioWeights(const TiltCoefficients& coeffs, const Matrix& source_v) {
  const Matrix psi = ExpandBasis(source_v, coeffs.basis);
  if (coeffs.gamma.size() != psi.cols()) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "tilt coefficients do not match basis");
  }
  return (-(psi * coeffs.gamma)).array().exp().matrix();
}

nlohmann::json ToJson(const BasisSpec& basis) {
  return {{"kind", std::string(BasisKindName(basis.kind))},
          {"d", basis.dimension}};
}

BasisSpec BasisSpecFromJson(const nlohmann::json& j) {
  BasisSpec basis;
  basis.kind = ParseBasisKind(j.at("kind").get<std::string>());
  basis.dimension = j.at("d").get<int>();
  if (basis.dimension < 1) {
    throw FedError(ErrorCode::kSchemaError, "basis dimension must be >= 1");
  }
  return basis;
}

nlohmann::json ToJson(const MomentSummary& summary) {
  std::vector<double> mean(summary.mean_basis.data(),
                           summary.mean_basis.data() + summary.mean_basis.size());
  return {{"site_id", summary.site_id},
          {"n", summary.n},
          {"basis", ToJson(summary.basis)},
          {"mean_basis", mean}};
}

MomentSummary MomentSummaryFromJson(const nlohmann::json& j) {
  MomentSummary summary;
  summary.site_id = j.at("site_id").get<std::string>();
  summary.n = j.at("n").get<long>();
  summary.basis = BasisSpecFromJson(j.at("basis"));
  const auto mean = j.at("mean_basis").get<std::vector<double>>();
  if (static_cast<int>(mean.size()) != summary.basis.dimension) {
    throw FedError(ErrorCode::kSchemaError,
                   "mean_basis length does not match basis dimension");
  }
  summary.mean_basis = Eigen::Map<const Vector>(mean.data(), mean.size());
  return summary;
}

}  // namespace fedcausal
