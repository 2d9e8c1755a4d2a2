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
// Combination of site estimates into a global estimate of the target
// average treatment effect,
//
//   mu_G = mu_T + sum_k eta_k (mu_k - mu_T),
//
// with fixed weights (target only, sample size, inverse variance) or
// adaptive weights from an L1-penalized regression of influence values,
// and a Wald interval from the combined influence function.

#ifndef FEDCAUSAL_FEDERATION_H_
#define FEDCAUSAL_FEDERATION_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedcausal/numkit.h"
#include "fedcausal/site_estimator.h"

namespace fedcausal {

enum class EnsembleMethod { kTargetOnly, kSampleSize, kInverseVariance,
                            kAipwL1, kMrL1 };

// "target", "ss", "ivw", "aipw_l1", "mr_l1".
std::string_view EnsembleMethodName(EnsembleMethod method);
EnsembleMethod ParseEnsembleMethod(std::string_view name);
bool IsL1Method(EnsembleMethod method);

enum class FixedScheme { kTargetOnly, kSampleSize, kInverseVariance };

// kContrast solves one weight vector for the effect mu_1 - mu_0 and uses it
// for both arms; kPerArm solves each arm separately.
enum class WeightMode { kContrast, kPerArm };

std::string_view WeightModeName(WeightMode mode);
WeightMode ParseWeightMode(std::string_view name);

// Selects the quantity an influence regression is built for.
inline constexpr int kEffectArm = -1;

inline const std::vector<double>& DefaultLambdaGrid() {
  static const std::vector<double> grid = {0.0, 1e-3, 1e-2, 0.1, 0.5,
                                           1.0, 2.0,  5.0,  10.0};
  return grid;
}

struct CvPoint {
  double lambda = 0.0;
  double error = 0.0;
};

struct EnsembleSolution {
  std::vector<std::string> site_ids;  // aligned with the estimates
  WeightMode mode = WeightMode::kContrast;
  std::array<Vector, 2> eta;          // per arm; equal under kContrast
  std::array<double, 2> lambda{0.0, 0.0};
  std::array<std::vector<CvPoint>, 2> cv_trace;
  std::array<Vector, 2> delta;        // mu_k - mu_T per arm (0 for target)
};

// Index of the single target estimate. Throws kMissingTarget.
int TargetIndex(const std::vector<SiteEstimate>& estimates);

// Throws kMissingTarget and, for inverse variance, kZeroVariance.
EnsembleSolution CombineFixed(const std::vector<SiteEstimate>& estimates,
                              FixedScheme scheme,
                              WeightMode mode = WeightMode::kContrast);

// How the bias of a source enters the influence regression. kUnit puts
// delta_k itself in every row, kRootNTarget puts sqrt(n_T) delta_k there and
// kRootN puts sqrt(N) delta_k, which makes the row sum N^2 times the mean
// squared error of the combination.
enum class BiasScale { kUnit, kRootNTarget, kRootN };

// kTotal adds lambda * delta_k^2 * eta_k to the row sum; kPerRow adds it to
// the row mean.
enum class PenaltyScale { kTotal, kPerRow };

struct L1Scaling {
  BiasScale bias = BiasScale::kRootNTarget;
  PenaltyScale penalty = PenaltyScale::kTotal;
};

std::string_view BiasScaleName(BiasScale scale);
BiasScale ParseBiasScale(std::string_view name);
std::string_view PenaltyScaleName(PenaltyScale scale);
PenaltyScale ParsePenaltyScale(std::string_view name);

// Zero-padded regression over all N units. Rows are target units followed
// by each source's units in estimate order; columns are the sources.
//   target rows:   r = phi_T,  column k = phi_T - phi_k(on target) - b_k
//   source j rows: r = 0,      column k = -[j = k] phi_k(own) - b_k
// where phi are influence values scaled by N/n and b_k is delta_k scaled
// per BiasScale.
struct L1Design {
  Matrix g;
  Vector r;
  Vector delta;              // unscaled, per source column
  std::vector<int> sources;  // estimate index of each column
};

L1Design BuildL1Design(const std::vector<SiteEstimate>& estimates, int arm,
                       BiasScale bias = L1Scaling{}.bias);

// Nonnegative source weights minimizing the penalized least squares with
// penalty lambda * delta_k^2 per source; the target receives the remainder,
// floored at zero with renormalization. Returns one weight per estimate.
Vector SolveL1Weights(const std::vector<SiteEstimate>& estimates, int arm,
                      double lambda, const L1Scaling& scaling = {},
                      const SolverOptions& options = {});

struct L1Selection {
  Vector eta;
  double lambda = 0.0;
  std::vector<CvPoint> cv_trace;
};

// Chooses lambda by repeated 50/50 splits of the design rows, scoring the
// unpenalized objective on the held-out half; ties go to the larger lambda.
L1Selection CrossValidateLambda(const std::vector<SiteEstimate>& estimates,
                                int arm, const std::vector<double>& grid,
                                int n_splits, std::uint64_t seed,
                                const L1Scaling& scaling = {},
                                const SolverOptions& options = {});

struct L1Options {
  WeightMode mode = WeightMode::kContrast;
  std::vector<double> lambda_grid = DefaultLambdaGrid();
  int cv_splits = 10;
  std::uint64_t seed = 0;
  L1Scaling scaling;
};

EnsembleSolution SolveL1Ensemble(const std::vector<SiteEstimate>& estimates,
                                 const L1Options& options);

struct SiteSummary {
  std::string site_id;
  SiteRole role = SiteRole::kSource;
  long n = 0;
  std::array<double, 2> mu{0.0, 0.0};
  double effect = 0.0;
  double effect_se = 0.0;
  std::array<double, 2> eta{0.0, 0.0};
  std::vector<std::string> warnings;
};

struct GlobalReport {
  EnsembleMethod method = EnsembleMethod::kTargetOnly;
  double delta_hat = 0.0;
  std::array<double, 2> mu{0.0, 0.0};
  double variance = 0.0;  // of delta_hat
  double se = 0.0;
  std::array<double, 2> ci{0.0, 0.0};
  double alpha = 0.05;
  long total_n = 0;
  EnsembleSolution solution;
  std::vector<SiteSummary> per_site;
  std::vector<std::string> warnings;
};

GlobalReport GlobalEstimate(const std::vector<SiteEstimate>& estimates,
                            const EnsembleSolution& solution, double alpha,
                            EnsembleMethod method);

// Standard normal quantile.
double NormalQuantile(double p);

nlohmann::json ToJson(const EnsembleSolution& solution);
nlohmann::json ToJson(const GlobalReport& report);

}  // namespace fedcausal

#endif  // FEDCAUSAL_FEDERATION_H_
