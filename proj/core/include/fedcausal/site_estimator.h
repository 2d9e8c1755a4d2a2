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
// Site-level estimators of the target-population mean potential outcome.
//
// Target site (augmented inverse propensity weighting):
//   mu_a = mean_T[ 1{A=a}/pi_a (Y - m_a) + m_a ]
//
// Source site k, transported to the target through the density ratio zeta
// and the projection tau_a(V) of m_a(X) onto the shared covariates:
//   mu_a = mean_k[ 1{A=a}/pi_a zeta (Y - m_a) ] + mean_k[ zeta (m_a - tau_a) ]
//        + mean_T[ tau_a(V) ]
//
// Influence contributions are stored centered and unscaled; the part that
// lives on source units and the part that lives on target units are kept
// apart. InfluenceValues() applies the N/n_k and N/n_T factors.

#ifndef FEDCAUSAL_SITE_ESTIMATOR_H_
#define FEDCAUSAL_SITE_ESTIMATOR_H_

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedcausal/density_ratio.h"
#include "fedcausal/nuisance.h"
#include "fedcausal/numkit.h"
#include "fedcausal/site_frame.h"

namespace fedcausal {

// Linear projection of the outcome regression onto (1, V), per arm.
struct TauModel {
  std::array<Vector, 2> coefficients;

  Vector Predict(const Matrix& v, int arm) const;
};

struct SiteDiagnostics {
  int clipped_propensities = 0;
  int capped_ratio_weights = 0;
  double ratio_max_over_mean = 0.0;
  bool extreme_weights = false;
  std::vector<std::string> warnings;
};

struct SiteEstimate {
  std::string site_id;
  SiteRole role = SiteRole::kTarget;
  std::array<double, 2> mu{0.0, 0.0};
  // Centered per-unit contributions on this site's own units.
  std::array<Vector, 2> xi_own;
  // Sources only: centered per-unit contributions on target units.
  std::array<Vector, 2> xi_on_target;
  long n_k = 0;
  long n_t = 0;
  TauModel tau;  // sources only
  SiteDiagnostics diagnostics;

  double Effect() const { return mu[1] - mu[0]; }
  bool HasTargetPart() const { return xi_on_target[0].size() > 0; }
};

// Nuisance values evaluated on a site's units, for estimators driven by
// externally supplied models.
struct NuisanceValues {
  Vector propensity;                // P(A = 1 | X), already clipped
  std::array<Vector, 2> outcome;    // m_0(X), m_1(X)
};

NuisanceValues EvaluateNuisance(const NuisanceFit& fit, const Matrix& x,
                                SiteDiagnostics* diagnostics = nullptr);

// OLS of the fitted outcome regression on (1, V) over all source units.
TauModel FitTau(const SiteFrame& source, const NuisanceFit& fit);
TauModel FitTauFromValues(const Matrix& v,
                          const std::array<Vector, 2>& outcome);

SiteEstimate EstimateTarget(const SiteFrame& target, const NuisanceFit& fit);
SiteEstimate EstimateTargetFromValues(const SiteFrame& target,
                                      const NuisanceValues& values);

// Caps density ratio weights at cap_multiple times their 99.9th percentile
// and records the ratio diagnostics.
Vector CapRatioWeights(const Vector& ratio, SiteDiagnostics* diagnostics,
                       double cap_multiple = 10.0);

// Source estimate computed with only the target's MomentSummary: the third
// term is tau' times the target's mean of (1, V). xi_on_target is left
// empty until CompleteOnTarget() runs at the target.
SiteEstimate EstimateSourceLocal(const SiteFrame& source,
                                 const MomentSummary& target_summary,
                                 const NuisanceFit& fit,
                                 const TiltCoefficients& tilt);

// Fills xi_on_target from the target's shared covariates.
void CompleteOnTarget(SiteEstimate& estimate, const Matrix& target_v);

// EstimateSourceLocal followed by CompleteOnTarget.
SiteEstimate EstimateSource(const SiteFrame& source, const SiteFrame& target,
                            const NuisanceFit& fit,
                            const TiltCoefficients& tilt);

// Source estimate from supplied nuisance values, density ratio weights and
// projection. ratio is used as given (no cap).
SiteEstimate EstimateSourceFromValues(const SiteFrame& source,
                                      const Matrix& target_v,
                                      const NuisanceValues& values,
                                      const Vector& ratio,
                                      const TauModel& tau);

struct InfluenceParts {
  Vector own;        // length n_k
  Vector on_target;  // length n_T, empty for the target estimate
};

// Scaled influence values for one arm: own * N/n_k, on_target * N/n_T.
InfluenceParts InfluenceValues(const SiteEstimate& estimate, long total_n,
                               int arm);
// Same for the effect mu_1 - mu_0.
InfluenceParts EffectInfluenceValues(const SiteEstimate& estimate,
                                     long total_n);

// Estimated variance of mu_arm (arm 0/1) or of the effect (arm < 0).
double SiteVariance(const SiteEstimate& estimate, int arm);

// Wire format: {site_id, role, mu0, mu1, n_k, n_t, xi_own: {arm0, arm1},
// xi_on_target: {arm0, arm1}, tau: {arm0, arm1}, diagnostics}.
nlohmann::json ToJson(const SiteEstimate& estimate);
SiteEstimate SiteEstimateFromJson(const nlohmann::json& j);

}  // namespace fedcausal

#endif  // FEDCAUSAL_SITE_ESTIMATOR_H_
