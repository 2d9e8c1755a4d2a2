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
// Candidate treatment and outcome models and their model-mixing ensembles.
//
// Each site fits J candidate propensity models and L candidate outcome models
// on a training split, scores them sequentially on the held-out units and
// combines them with exponential weights:
//
//   propensity: weight_j  = mean_i softmax_j(cumulative log-likelihood < i)
//   outcome:    weight_l  = mean_i softmax_l(-kappa * cumulative SSE < i)
//
// Candidates are then refit on the full site sample and the weights reused.

#ifndef FEDCAUSAL_NUISANCE_H_
#define FEDCAUSAL_NUISANCE_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedcausal/numkit.h"
#include "fedcausal/site_frame.h"

namespace fedcausal {

enum class FeatureKind {
  kRaw,          // every covariate column
  kKangSchafer,  // Kang-Schafer transform of four columns
  kSubset,       // the listed columns unchanged
};

std::string_view FeatureKindName(FeatureKind kind);
FeatureKind ParseFeatureKind(std::string_view name);

// Kang-Schafer covariate transform of an n x 4 matrix:
//   (exp(x1/2), x2/(1+exp(x1))+10, (x1 x3/25+0.6)^3, (x2+x4+20)^2).
Matrix KangSchafer(const Matrix& x);

struct FeatureMap {
  FeatureKind kind = FeatureKind::kRaw;
  // kSubset: selected columns. kKangSchafer: the four input columns, empty
  // meaning 0..3. Ignored for kRaw.
  std::vector<int> columns;

  // Features without the intercept column.
  Matrix Apply(const Matrix& x) const;
};

enum class CandidateTarget { kTreatment, kOutcome };

struct CandidateSpec {
  std::string id;
  CandidateTarget target = CandidateTarget::kOutcome;
  FeatureMap feature_map;
};

struct FittedCandidate {
  CandidateSpec spec;
  LinearFit fit;  // refit on the full sample
  bool failed = false;
};

struct MixedModel {
  CandidateTarget target = CandidateTarget::kOutcome;
  std::vector<FittedCandidate> candidates;
  Vector weights;  // one per candidate, on the simplex
  std::uint64_t split_seed = 0;
  double train_fraction = 0.5;
  // Site-local unit indices of the validation units, in scoring order.
  std::vector<int> validation_order;
  std::vector<std::string> warnings;
};

struct DataSplit {
  std::vector<int> train;
  std::vector<int> validation;
};

// Seeded shuffle of 0..n-1; the first floor(n * fraction) are training
// units. Throws kInvalidArgument for fraction outside (0, 1) and
// kTooFewUnits when either part would be empty.
DataSplit SplitData(int n, double fraction, std::uint64_t seed);
DataSplit SplitData(const SiteFrame& frame, double fraction,
                    std::uint64_t seed);

// max(1, floor(log L)).
double DefaultKappa(int num_candidates);

MixedModel MixPropensity(const SiteFrame& frame,
                         const std::vector<CandidateSpec>& specs,
                         double fraction, std::uint64_t seed,
                         const SolverOptions& options = {});

// Uses only units with A == arm. kappa <= 0 selects DefaultKappa.
MixedModel MixOutcome(const SiteFrame& frame, int arm,
                      const std::vector<CandidateSpec>& specs, double fraction,
                      std::uint64_t seed, double kappa = 0.0,
                      const SolverOptions& options = {});

struct NuisanceOptions {
  double train_fraction = 0.5;
  std::uint64_t seed = 0;
  double kappa = 0.0;  // <= 0 selects DefaultKappa
  double clip_lo = 0.01;
  double clip_hi = 0.99;
  // Independent splits whose mixing weights are averaged.
  int split_count = 1;
  SolverOptions solver;
};

struct NuisanceFit {
  MixedModel pi;
  MixedModel m1;
  MixedModel m0;
  double clip_lo = 0.01;
  double clip_hi = 0.99;

  const MixedModel& outcome(int arm) const { return arm == 1 ? m1 : m0; }
};

NuisanceFit FitNuisance(const SiteFrame& frame,
                        const std::vector<CandidateSpec>& treatment_specs,
                        const std::vector<CandidateSpec>& outcome_specs,
                        const NuisanceOptions& options = {});

// Unclipped weighted mixture of candidate P(A = 1 | x).
Vector MixturePropensity(const MixedModel& model, const Matrix& x);
// Weighted mixture of candidate regressions.
Vector MixtureOutcome(const MixedModel& model, const Matrix& x);

// P(A = arm | x) clipped to [clip_lo, clip_hi].
Vector PredictPropensity(const NuisanceFit& fit, const Matrix& x, int arm);
Vector PredictOutcome(const NuisanceFit& fit, const Matrix& x, int arm);

// Wire format: {id, target, feature_map: {kind, columns}}.
nlohmann::json ToJson(const CandidateSpec& spec);
CandidateSpec CandidateSpecFromJson(const nlohmann::json& j);

}  // namespace fedcausal

#endif  // FEDCAUSAL_NUISANCE_H_
