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
// Multi-site simulation designs and the Monte Carlo harness.
//
// Covariates are skew-normal per site and covariate. Outcomes and
// treatments are generated from either the raw covariates X or their
// Kang-Schafer transform Z. The true treatment effect is zero in every
// shipped design because treatment does not enter the outcome.

#ifndef FEDCAUSAL_SIMBENCH_H_
#define FEDCAUSAL_SIMBENCH_H_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedcausal/federation.h"
#include "fedcausal/fedruntime.h"
#include "fedcausal/nuisance.h"
#include "fedcausal/numkit.h"
#include "fedcausal/rng.h"
#include "fedcausal/site_frame.h"

namespace fedcausal {

// Draws n values from SN(location, scale^2, shape) by the two-normal
// representation. Throws kInvalidArgument for scale <= 0.
Vector SampleSkewNormal(double location, double scale, double shape, int n,
                        Rng& rng);

enum class CovariateSource { kX, kZ };

struct SkewParams {
  double location = 0.0;
  double scale = 1.0;
  double shape = 0.0;
};

struct ScenarioSpec {
  std::string name;
  int num_sites = 5;
  std::vector<int> n;                              // target first
  std::vector<std::vector<SkewParams>> skew;       // [site][covariate]
  std::vector<CovariateSource> dgp_assignment;     // per site
  bool mismatch = false;  // target observes the first two covariates only
  Vector beta_x, beta_z, alpha_x, alpha_z;
  // Target coefficients under mismatch.
  Vector target_beta_x, target_alpha_x;
  double intercept = 210.0;
  double noise_sd = 1.0;
  // Z enters the treatment model as (Z - center) / scale.
  Vector treatment_z_center, treatment_z_scale;
  int replications = 500;
  std::uint64_t seed = 0;

  int covariates() const { return static_cast<int>(beta_x.size()); }
  int observed_at_target() const { return mismatch ? 2 : covariates(); }
  // Throws kSchemaError on inconsistent sizes.
  void Validate() const;
};

ScenarioSpec ScenarioSpecFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const ScenarioSpec& spec);

// Site 0 is the target ("site1"); sources are "site2", ...
std::string SiteName(int site);

// Generates site k of replication 'replication' from its own substream.
SiteFrame GenerateSite(const ScenarioSpec& spec, int site,
                       std::uint64_t replication);
std::vector<SiteFrame> GenerateSites(const ScenarioSpec& spec,
                                     std::uint64_t replication);

// Candidate sets: the common-model family (X for every site, or the shared
// covariates under mismatch) and the multiply robust family (X and Z).
ProtocolConfig AipwFamilyConfig(const ScenarioSpec& spec,
                                const ProtocolConfig& base);
ProtocolConfig MrFamilyConfig(const ScenarioSpec& spec,
                              const ProtocolConfig& base);

struct ReplicationRecord {
  int replication = 0;
  EnsembleMethod method = EnsembleMethod::kTargetOnly;
  bool ok = false;
  double delta_hat = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool covered = false;
  double lambda = 0.0;
  std::vector<double> eta;  // per site, effect weights (arm 1)
  std::string error;
};

struct MethodMetrics {
  EnsembleMethod method = EnsembleMethod::kTargetOnly;
  int replications = 0;
  int failures = 0;
  double mae = 0.0;
  double rmse = 0.0;
  double bias = 0.0;
  double coverage = 0.0;
  double ci_length = 0.0;
  double mean_se = 0.0;
  double mc_sd = 0.0;
};

struct MetricsTable {
  std::string scenario;
  double true_effect = 0.0;
  std::vector<MethodMetrics> methods;

  const MethodMetrics& Get(EnsembleMethod method) const;
};

struct AuditTotals {
  int rounds = 0;
  int violations = 0;
  int census_mismatches = 0;
  long bytes = 0;
};

struct ScenarioResult {
  MetricsTable metrics;
  std::vector<ReplicationRecord> replications;  // replication-major
  std::vector<std::string> ledger_lines;        // JSON lines, all rounds
  AuditTotals audit;
};

struct SimOptions {
  int threads = 0;        // <= 0: DefaultThreadCount()
  int replications = -1;  // < 0: spec.replications
  bool keep_ledger = true;
};

// Aggregates replication records (true effect 0 unless given).
MetricsTable Aggregate(const std::vector<ReplicationRecord>& records,
                       const std::vector<EnsembleMethod>& methods,
                       const std::string& scenario, double true_effect = 0.0);

// Runs every replication through the federated runtime, the common-model
// family and the multiply robust family each once per replication. A
// replication that throws is recorded with ok = false and left out of the
// aggregates.
ScenarioResult RunScenario(const ScenarioSpec& spec,
                           const std::vector<EnsembleMethod>& methods,
                           const ProtocolConfig& base,
                           const SimOptions& options = {});

// metrics.csv and replications.csv contents.
std::string MetricsCsv(const MetricsTable& table);
std::string ReplicationsCsv(const std::vector<ReplicationRecord>& records,
                            int num_sites);

}  // namespace fedcausal

#endif  // FEDCAUSAL_SIMBENCH_H_
