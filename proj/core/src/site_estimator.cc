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

#include "fedcausal/site_estimator.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedcausal/status.h"

namespace fedcausal {
namespace {

constexpr double kExtremeRatio = 100.0;

Vector Centered(const Vector& v, double mean) {
  return (v.array() - mean).matrix();
}

double MeanSquare(const Vector& v) {
  return CompensatedMean(Vector(v.array().square()));
}

void CheckSameLength(const SiteFrame& frame, const NuisanceValues& values) {
  const Eigen::Index n = frame.size();
  if (values.propensity.size() != n || values.outcome[0].size() != n ||
      values.outcome[1].size() != n) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "nuisance values do not match the site size");
  }
}

double ArmPropensity(double p1, int arm) { return arm == 1 ? p1 : 1.0 - p1; }

// Shared arithmetic of the source estimator given the target's mean of
// (1, V).
SiteEstimate SourceCore(const SiteFrame& source, const Vector& target_mean_1v,
                        long n_t, const NuisanceValues& values,
                        const Vector& ratio, const TauModel& tau,
                        SiteDiagnostics diagnostics) {
  CheckSameLength(source, values);
  const Matrix v = source.SharedCovariates();
  if (ratio.size() != source.size()) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "ratio weights do not match the site size");
  }
  if (target_mean_1v.size() != v.cols() + 1) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "target moments do not match the shared covariates");
  }
  SiteEstimate est;
  est.site_id = source.site_id;
  est.role = SiteRole::kSource;
  est.n_k = static_cast<long>(source.size());
  est.n_t = n_t;
  est.tau = tau;
  est.diagnostics = std::move(diagnostics);
  for (int arm = 0; arm < 2; ++arm) {
    const Vector& m = values.outcome[arm];
    const Vector tau_v = tau.Predict(v, arm);
    Vector t(source.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double indicator = source.a(i) == arm ? 1.0 : 0.0;
      const double pa = ArmPropensity(values.propensity(i), arm);
      t(i) = indicator / pa * ratio(i) * (source.y(i) - m(i)) +
             ratio(i) * (m(i) - tau_v(i));
    }
    const double local = CompensatedMean(t);
    const double projected = tau.coefficients[arm].dot(target_mean_1v);
    est.mu[arm] = local + projected;
    est.xi_own[arm] = Centered(t, local);
  }
  return est;
}

Vector TargetMean1V(const MomentSummary& summary, int q) {
  if (summary.basis.covariates() != q) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "moment summary basis does not match the shared covariates");
  }
  return summary.mean_basis.head(q + 1);
}

}  // namespace

Vector TauModel::Predict(const Matrix& v, int arm) const {
  const Vector& c = coefficients[arm];
  if (c.size() != v.cols() + 1) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "tau coefficients do not match the shared covariates");
  }
  return WithIntercept(v) * c;
}

NuisanceValues EvaluateNuisance(const NuisanceFit& fit, const Matrix& x,
                                SiteDiagnostics* diagnostics) {
  NuisanceValues values;
  const Vector raw = MixturePropensity(fit.pi, x);
  values.propensity = raw.cwiseMax(fit.clip_lo).cwiseMin(fit.clip_hi);
  if (diagnostics != nullptr) {
    int clipped = 0;
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
      if (raw(i) != values.propensity(i)) ++clipped;
    }
    diagnostics->clipped_propensities += clipped;
    if (clipped > 0) {
      diagnostics->warnings.push_back(
          "PositivityWarning: " + std::to_string(clipped) +
          " propensities clipped");
    }
  }
  values.outcome[0] = MixtureOutcome(fit.m0, x);
  values.outcome[1] = MixtureOutcome(fit.m1, x);
  return values;
}

TauModel FitTauFromValues(const Matrix& v,
                          const std::array<Vector, 2>& outcome) {
  const DesignMatrix design = WithIntercept(v);
  TauModel tau;
  for (int arm = 0; arm < 2; ++arm) {
    tau.coefficients[arm] = FitOls(design, outcome[arm]).coefficients;
  }
  return tau;
}

TauModel FitTau(const SiteFrame& source, const NuisanceFit& fit) {
  return FitTauFromValues(source.SharedCovariates(),
                          {MixtureOutcome(fit.m0, source.x),
                           MixtureOutcome(fit.m1, source.x)});
}

SiteEstimate EstimateTargetFromValues(const SiteFrame& target,
                                      const NuisanceValues& values) {
  CheckSameLength(target, values);
  SiteEstimate est;
  est.site_id = target.site_id;
  est.role = SiteRole::kTarget;
  est.n_k = static_cast<long>(target.size());
  est.n_t = est.n_k;
  for (int arm = 0; arm < 2; ++arm) {
    const Vector& m = values.outcome[arm];
    Vector t(target.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double indicator = target.a(i) == arm ? 1.0 : 0.0;
      const double pa = ArmPropensity(values.propensity(i), arm);
      t(i) = indicator / pa * (target.y(i) - m(i)) + m(i);
    }
    est.mu[arm] = CompensatedMean(t);
    est.xi_own[arm] = Centered(t, est.mu[arm]);
  }
  return est;
}

SiteEstimate EstimateTarget(const SiteFrame& target, const NuisanceFit& fit) {
  if (target.role != SiteRole::kTarget) {
    throw FedError(ErrorCode::kInvalidArgument,
                   "EstimateTarget needs the target frame");
  }
  SiteDiagnostics diag;
  const NuisanceValues values = EvaluateNuisance(fit, target.x, &diag);
  SiteEstimate est = EstimateTargetFromValues(target, values);
  est.diagnostics = std::move(diag);
  return est;
}

Vector CapRatioWeights(const Vector& ratio, SiteDiagnostics* diagnostics,
                       double cap_multiple) {
  if (ratio.size() == 0) return ratio;
  std::vector<double> sorted(ratio.data(), ratio.data() + ratio.size());
  const size_t rank = static_cast<size_t>(
      std::ceil(0.999 * static_cast<double>(sorted.size()))) - 1;
  std::nth_element(sorted.begin(), sorted.begin() + rank, sorted.end());
  const double cap = cap_multiple * sorted[rank];
  Vector capped = ratio.cwiseMin(cap);
  if (diagnostics != nullptr) {
    int count = 0;
    for (Eigen::Index i = 0; i < ratio.size(); ++i) {
      if (ratio(i) > cap) ++count;
    }
    diagnostics->capped_ratio_weights = count;
    const double mean = CompensatedMean(capped);
    diagnostics->ratio_max_over_mean = capped.maxCoeff() / mean;
    if (diagnostics->ratio_max_over_mean > kExtremeRatio) {
      diagnostics->extreme_weights = true;
      diagnostics->warnings.push_back(
          "ExtremeWeights: density ratio max/mean = " +
          std::to_string(diagnostics->ratio_max_over_mean));
    }
  }
  return capped;
}

SiteEstimate EstimateSourceLocal(const SiteFrame& source,
                                 const MomentSummary& target_summary,
                                 const NuisanceFit& fit,
                                 const TiltCoefficients& tilt) {
  if (source.role != SiteRole::kSource) {
    throw FedError(ErrorCode::kInvalidArgument,
                   "EstimateSourceLocal needs a source frame");
  }
  const Matrix v = source.SharedCovariates();
  SiteDiagnostics diag;
  const NuisanceValues values = EvaluateNuisance(fit, source.x, &diag);
  const Vector ratio = CapRatioWeights(RatioWeights(tilt, v), &diag);
  const TauModel tau = FitTauFromValues(v, values.outcome);
  return SourceCore(source,
                    TargetMean1V(target_summary, static_cast<int>(v.cols())),
                    target_summary.n, values, ratio, tau, std::move(diag));
}

void CompleteOnTarget(SiteEstimate& estimate, const Matrix& target_v) {
  if (estimate.role != SiteRole::kSource) {
    throw FedError(ErrorCode::kInvalidArgument,
                   "only source estimates have a target part");
  }
  if (target_v.rows() != estimate.n_t) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "target size differs from the moment summary");
  }
  for (int arm = 0; arm < 2; ++arm) {
    const Vector tau_v = estimate.tau.Predict(target_v, arm);
    estimate.xi_on_target[arm] = Centered(tau_v, CompensatedMean(tau_v));
  }
}

SiteEstimate EstimateSource(const SiteFrame& source, const SiteFrame& target,
                            const NuisanceFit& fit,
                            const TiltCoefficients& tilt) {
  const Matrix target_v = target.SharedCovariates();
  SiteEstimate est = EstimateSourceLocal(
      source, TargetMoments(target_v, tilt.basis, target.site_id), fit, tilt);
  CompleteOnTarget(est, target_v);
  return est;
}

SiteEstimate EstimateSourceFromValues(const SiteFrame& source,
                                      const Matrix& target_v,
                                      const NuisanceValues& values,
                                      const Vector& ratio,
                                      const TauModel& tau) {
  const int q = static_cast<int>(target_v.cols());
  const MomentSummary summary =
      TargetMoments(target_v, BasisSpec::For(BasisKind::kLinear, q));
  SiteEstimate est = SourceCore(source, TargetMean1V(summary, q), summary.n,
                                values, ratio, tau, SiteDiagnostics{});
  CompleteOnTarget(est, target_v);
  return est;
}

InfluenceParts InfluenceValues(const SiteEstimate& estimate, long total_n,
                               int arm) {
  InfluenceParts parts;
  const double n = static_cast<double>(total_n);
  parts.own = estimate.xi_own[arm] * (n / static_cast<double>(estimate.n_k));
  if (estimate.HasTargetPart()) {
    parts.on_target =
        estimate.xi_on_target[arm] * (n / static_cast<double>(estimate.n_t));
  }
  return parts;
}

InfluenceParts EffectInfluenceValues(const SiteEstimate& estimate,
                                     long total_n) {
  InfluenceParts one = InfluenceValues(estimate, total_n, 1);
  const InfluenceParts zero = InfluenceValues(estimate, total_n, 0);
  one.own -= zero.own;
  if (one.on_target.size() > 0) one.on_target -= zero.on_target;
  return one;
}

double SiteVariance(const SiteEstimate& estimate, int arm) {
  auto pick = [arm](const std::array<Vector, 2>& xi) -> Vector {
    return arm < 0 ? Vector(xi[1] - xi[0]) : xi[arm];
  };
  double var = MeanSquare(pick(estimate.xi_own)) /
               static_cast<double>(estimate.n_k);
  if (estimate.HasTargetPart()) {
    var += MeanSquare(pick(estimate.xi_on_target)) /
           static_cast<double>(estimate.n_t);
  }
  return var;
}

namespace {

nlohmann::json ArmPair(const std::array<Vector, 2>& v) {
  auto to_vec = [](const Vector& x) {
    return std::vector<double>(x.data(), x.data() + x.size());
  };
  return {{"arm0", to_vec(v[0])}, {"arm1", to_vec(v[1])}};
}

std::array<Vector, 2> ArmPairFromJson(const nlohmann::json& j) {
  std::array<Vector, 2> out;
  for (int arm = 0; arm < 2; ++arm) {
    const auto values =
        j.at(arm == 0 ? "arm0" : "arm1").get<std::vector<double>>();
    out[arm] = Eigen::Map<const Vector>(values.data(),
                                        static_cast<Eigen::Index>(values.size()));
  }
  return out;
}

}  // namespace

nlohmann::json ToJson(const SiteEstimate& estimate) {
  const SiteDiagnostics& d = estimate.diagnostics;
  nlohmann::json j = {
      {"site_id", estimate.site_id},
      {"role", SiteRoleName(estimate.role)},
      {"mu0", estimate.mu[0]},
      {"mu1", estimate.mu[1]},
      {"n_k", estimate.n_k},
      {"n_t", estimate.n_t},
      {"xi_own", ArmPair(estimate.xi_own)},
      {"xi_on_target", ArmPair(estimate.xi_on_target)},
      {"diagnostics",
       {{"clipped_propensities", d.clipped_propensities},
        {"capped_ratio_weights", d.capped_ratio_weights},
        {"ratio_max_over_mean", d.ratio_max_over_mean},
        {"extreme_weights", d.extreme_weights},
        {"warnings", d.warnings}}}};
  if (estimate.role == SiteRole::kSource) {
    j["tau"] = ArmPair(estimate.tau.coefficients);
  }
  return j;
}

SiteEstimate SiteEstimateFromJson(const nlohmann::json& j) {
  try {
    SiteEstimate est;
    est.site_id = j.at("site_id").get<std::string>();
    const std::string role = j.at("role").get<std::string>();
    if (role == "target") {
      est.role = SiteRole::kTarget;
    } else if (role == "source") {
      est.role = SiteRole::kSource;
    } else {
      throw FedError(ErrorCode::kSchemaError, "unknown role '" + role + "'");
    }
    est.mu[0] = j.at("mu0").get<double>();
    est.mu[1] = j.at("mu1").get<double>();
    est.n_k = j.at("n_k").get<long>();
    est.n_t = j.at("n_t").get<long>();
    est.xi_own = ArmPairFromJson(j.at("xi_own"));
    est.xi_on_target = ArmPairFromJson(j.at("xi_on_target"));
    if (j.contains("tau")) est.tau.coefficients = ArmPairFromJson(j.at("tau"));
    if (j.contains("diagnostics")) {
      const nlohmann::json& d = j.at("diagnostics");
      SiteDiagnostics& diag = est.diagnostics;
      diag.clipped_propensities = d.value("clipped_propensities", 0);
      diag.capped_ratio_weights = d.value("capped_ratio_weights", 0);
      diag.ratio_max_over_mean = d.value("ratio_max_over_mean", 0.0);
      diag.extreme_weights = d.value("extreme_weights", false);
      diag.warnings =
          d.value("warnings", std::vector<std::string>{});
    }
    if (est.xi_own[0].size() != est.n_k || est.xi_own[1].size() != est.n_k) {
      throw FedError(ErrorCode::kSchemaError,
                     "xi_own length differs from n_k");
    }
    return est;
  } catch (const nlohmann::json::exception& e) {
    throw FedError(ErrorCode::kSchemaError, e.what());
  }
}

}  // namespace fedcausal
