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

#include "fedcausal/simbench.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "fedcausal/parallel.h"
#include "fedcausal/status.h"

namespace fedcausal {
namespace {

Vector VectorFromJson(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> ToStd(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string Format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

SiteModels Models(const std::vector<std::pair<std::string, FeatureMap>>& maps) {
  SiteModels models;
  for (const auto& [id, map] : maps) {
    models.treatment.push_back(
        {"pi_" + id, CandidateTarget::kTreatment, map});
    models.outcome.push_back({"m_" + id, CandidateTarget::kOutcome, map});
  }
  return models;
}

}  // namespace

Vector SampleSkewNormal(double location, double scale, double shape, int n,
                        Rng& rng) {
  if (!(scale > 0.0)) {
    throw FedError(ErrorCode::kInvalidArgument, "skew-normal scale must be > 0");
  }
  const double delta = shape / std::sqrt(1.0 + shape * shape);
  const double rest = std::sqrt(1.0 - delta * delta);
  Vector out(n);
  for (int i = 0; i < n; ++i) {
    const double u0 = StandardNormal(rng);
    const double u1 = StandardNormal(rng);
    out(i) = location + scale * (delta * std::abs(u0) + rest * u1);
  }
  return out;
}

void ScenarioSpec::Validate() const {
  auto fail = [](const std::string& msg) {
    throw FedError(ErrorCode::kSchemaError, msg);
  };
  if (num_sites < 1) fail("K must be >= 1");
  if (static_cast<int>(n.size()) != num_sites) fail("n must have K entries");
  if (static_cast<int>(skew.size()) != num_sites) {
    fail("skew must have K entries");
  }
  if (static_cast<int>(dgp_assignment.size()) != num_sites) {
    fail("dgp_assignment must have K entries");
  }
  const int p = covariates();
  if (p != 4) fail("the Kang-Schafer design needs four covariates");
  for (const Vector* v : {&beta_z, &alpha_x, &alpha_z, &treatment_z_center,
                          &treatment_z_scale}) {
    if (v->size() != p) fail("coefficient vectors must have 4 entries");
  }
  if (mismatch && (target_beta_x.size() != p || target_alpha_x.size() != p)) {
    fail("mismatch needs target_beta_x and target_alpha_x");
  }
  for (int k = 0; k < num_sites; ++k) {
    if (n[k] < 8) fail("every site needs at least 8 units");
    if (static_cast<int>(skew[k].size()) != p) {
      fail("skew needs one entry per covariate");
    }
    for (const SkewParams& s : skew[k]) {
      if (!(s.scale > 0.0)) fail("skew scale must be > 0");
    }
  }
  if (!(noise_sd >= 0.0)) fail("noise_sd must be >= 0");
  if ((treatment_z_scale.array() <= 0.0).any()) {
    fail("treatment_z_scale must be positive");
  }
  if (replications < 1) fail("replications must be >= 1");
}

ScenarioSpec ScenarioSpecFromJson(const nlohmann::json& j) {
  try {
    ScenarioSpec s;
    s.name = j.value("name", std::string("scenario"));
    s.num_sites = j.at("K").get<int>();
    s.n = j.at("n").get<std::vector<int>>();
    for (const auto& site : j.at("skew")) {
      std::vector<SkewParams> params;
      for (const auto& c : site) {
        params.push_back({c.value("location", 0.0), c.value("scale", 1.0),
                          c.value("shape", 0.0)});
      }
      s.skew.push_back(std::move(params));
    }
    for (const auto& a : j.at("dgp_assignment")) {
      const std::string v = a.get<std::string>();
      if (v == "uses_X") {
        s.dgp_assignment.push_back(CovariateSource::kX);
      } else if (v == "uses_Z") {
        s.dgp_assignment.push_back(CovariateSource::kZ);
      } else {
        throw FedError(ErrorCode::kSchemaError,
                       "dgp_assignment entries are uses_X or uses_Z");
      }
    }
    s.mismatch = j.value("mismatch", false);
    s.beta_x = VectorFromJson(j.at("beta_x"));
    s.beta_z = VectorFromJson(j.at("beta_z"));
    s.alpha_x = VectorFromJson(j.at("alpha_x"));
    s.alpha_z = VectorFromJson(j.at("alpha_z"));
    if (j.contains("target_beta_x")) {
      s.target_beta_x = VectorFromJson(j.at("target_beta_x"));
    }
    if (j.contains("target_alpha_x")) {
      s.target_alpha_x = VectorFromJson(j.at("target_alpha_x"));
    }
    s.intercept = j.value("intercept", s.intercept);
    s.noise_sd = j.value("noise_sd", s.noise_sd);
    s.treatment_z_center = j.contains("treatment_z_center")
                               ? VectorFromJson(j.at("treatment_z_center"))
                               : Vector::Zero(s.beta_x.size());
    s.treatment_z_scale = j.contains("treatment_z_scale")
                              ? VectorFromJson(j.at("treatment_z_scale"))
                              : Vector::Ones(s.beta_x.size());
    s.replications = j.value("replications", s.replications);
    s.seed = j.value("seed", s.seed);
    s.Validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FedError(ErrorCode::kSchemaError, e.what());
  }
}

nlohmann::json ToJson(const ScenarioSpec& s) {
  nlohmann::json skew = nlohmann::json::array();
  for (const auto& site : s.skew) {
    nlohmann::json row = nlohmann::json::array();
    for (const SkewParams& p : site) {
      row.push_back(
          {{"location", p.location}, {"scale", p.scale}, {"shape", p.shape}});
    }
    skew.push_back(row);
  }
  nlohmann::json assignment = nlohmann::json::array();
  for (CovariateSource c : s.dgp_assignment) {
    assignment.push_back(c == CovariateSource::kX ? "uses_X" : "uses_Z");
  }
  nlohmann::json j = {{"name", s.name},
                      {"K", s.num_sites},
                      {"n", s.n},
                      {"skew", skew},
                      {"dgp_assignment", assignment},
                      {"mismatch", s.mismatch},
                      {"beta_x", ToStd(s.beta_x)},
                      {"beta_z", ToStd(s.beta_z)},
                      {"alpha_x", ToStd(s.alpha_x)},
                      {"alpha_z", ToStd(s.alpha_z)},
                      {"intercept", s.intercept},
                      {"noise_sd", s.noise_sd},
                      {"treatment_z_center", ToStd(s.treatment_z_center)},
                      {"treatment_z_scale", ToStd(s.treatment_z_scale)},
                      {"replications", s.replications},
                      {"seed", s.seed}};
  if (s.mismatch) {
    j["target_beta_x"] = ToStd(s.target_beta_x);
    j["target_alpha_x"] = ToStd(s.target_alpha_x);
  }
  return j;
}

std::string SiteName(int site) { return "site" + std::to_string(site + 1); }

SiteFrame GenerateSite(const ScenarioSpec& spec, int site,
                       std::uint64_t replication) {
  const int n = spec.n[site];
  const int p = spec.covariates();
  Rng rng = MakeRng(spec.seed, {replication, static_cast<std::uint64_t>(site)});
  Matrix x(n, p);
  for (int c = 0; c < p; ++c) {
    const SkewParams& s = spec.skew[site][c];
    x.col(c) = SampleSkewNormal(s.location, s.scale, s.shape, n, rng);
  }
  const bool is_target = site == 0;
  const bool uses_z = spec.dgp_assignment[site] == CovariateSource::kZ;
  Vector beta = spec.beta_x;
  Vector alpha = spec.alpha_x;
  if (is_target && spec.mismatch) {
    beta = spec.target_beta_x;
    alpha = spec.target_alpha_x;
  }
  Vector mean_outcome, linear_predictor;
  if (uses_z) {
    const Matrix z = KangSchafer(x);
    mean_outcome = (z * spec.beta_z).array() + spec.intercept;
    const Matrix z_std =
        ((z.rowwise() - spec.treatment_z_center.transpose()).array().rowwise() /
         spec.treatment_z_scale.transpose().array())
            .matrix();
    linear_predictor = z_std * spec.alpha_z;
  } else {
    mean_outcome = (x * beta).array() + spec.intercept;
    linear_predictor = x * alpha;
  }
  SiteFrame frame;
  frame.site_id = SiteName(site);
  frame.role = is_target ? SiteRole::kTarget : SiteRole::kSource;
  frame.y.resize(n);
  frame.a.resize(n);
  for (int i = 0; i < n; ++i) {
    frame.y(i) = mean_outcome(i) + spec.noise_sd * StandardNormal(rng);
  }
  for (int i = 0; i < n; ++i) {
    frame.a(i) = UniformUnit(rng) < Expit(linear_predictor(i)) ? 1.0 : 0.0;
  }
  const int observed = is_target ? spec.observed_at_target() : p;
  frame.x = x.leftCols(observed);
  for (int c = 0; c < spec.observed_at_target(); ++c) {
    frame.shared_cols.push_back(c);
  }
  return frame;
}

std::vector<SiteFrame> GenerateSites(const ScenarioSpec& spec,
                                     std::uint64_t replication) {
  std::vector<SiteFrame> frames;
  for (int k = 0; k < spec.num_sites; ++k) {
    frames.push_back(GenerateSite(spec, k, replication));
  }
  return frames;
}

ProtocolConfig AipwFamilyConfig(const ScenarioSpec& spec,
                                const ProtocolConfig& base) {
  ProtocolConfig config = base;
  config.site_models.clear();
  FeatureMap map;
  if (spec.mismatch) {
    map.kind = FeatureKind::kSubset;
    for (int c = 0; c < spec.observed_at_target(); ++c) map.columns.push_back(c);
  }
  config.default_models = Models({{"x", map}});
  return config;
}

ProtocolConfig MrFamilyConfig(const ScenarioSpec& spec,
                              const ProtocolConfig& base) {
  ProtocolConfig config = base;
  config.site_models.clear();
  FeatureMap raw;
  FeatureMap ks;
  ks.kind = FeatureKind::kKangSchafer;
  config.default_models = Models({{"x", raw}, {"z", ks}});
  if (spec.mismatch) {
    // The target observes too few covariates for the transform.
    config.site_models[SiteName(0)] = Models({{"x", raw}});
  }
  return config;
}

const MethodMetrics& MetricsTable::Get(EnsembleMethod method) const {
  for (const MethodMetrics& m : methods) {
    if (m.method == method) return m;
  }
  throw FedError(ErrorCode::kInvalidArgument,
                 "method '" + std::string(EnsembleMethodName(method)) +
                     "' not in the table");
}

MetricsTable Aggregate(const std::vector<ReplicationRecord>& records,
                       const std::vector<EnsembleMethod>& methods,
                       const std::string& scenario, double true_effect) {
  MetricsTable table;
  table.scenario = scenario;
  table.true_effect = true_effect;
  for (EnsembleMethod method : methods) {
    std::vector<double> err, abs_err, sq_err, cover, length, se, est;
    MethodMetrics m;
    m.method = method;
    for (const ReplicationRecord& r : records) {
      if (r.method != method) continue;
      if (!r.ok) {
        ++m.failures;
        continue;
      }
      const double e = r.delta_hat - true_effect;
      err.push_back(e);
      abs_err.push_back(std::abs(e));
      sq_err.push_back(e * e);
      cover.push_back(r.covered ? 1.0 : 0.0);
      length.push_back(r.ci_hi - r.ci_lo);
      se.push_back(r.se);
      est.push_back(r.delta_hat);
    }
    m.replications = static_cast<int>(err.size());
    if (m.replications > 0) {
      m.bias = CompensatedMean(err);
      m.mae = CompensatedMean(abs_err);
      m.rmse = std::sqrt(CompensatedMean(sq_err));
      m.coverage = CompensatedMean(cover);
      m.ci_length = CompensatedMean(length);
      m.mean_se = CompensatedMean(se);
      const double mean = CompensatedMean(est);
      std::vector<double> dev;
      for (double v : est) dev.push_back((v - mean) * (v - mean));
      m.mc_sd = m.replications > 1
                    ? std::sqrt(CompensatedSum(dev) / (m.replications - 1))
                    : 0.0;
    }
    table.methods.push_back(m);
  }
  return table;
}

ScenarioResult RunScenario(const ScenarioSpec& spec,
                           const std::vector<EnsembleMethod>& methods,
                           const ProtocolConfig& base,
                           const SimOptions& options) {
  spec.Validate();
  if (methods.empty()) {
    throw FedError(ErrorCode::kInvalidArgument, "no methods requested");
  }
  const int reps =
      options.replications >= 0 ? options.replications : spec.replications;
  if (reps < 1) {
    throw FedError(ErrorCode::kInvalidArgument, "replications must be >= 1");
  }
  std::vector<EnsembleMethod> common, robust;
  for (EnsembleMethod m : methods) {
    (m == EnsembleMethod::kMrL1 ? robust : common).push_back(m);
  }
  struct RepOutput {
    std::vector<ReplicationRecord> records;
    std::vector<std::string> ledger;
    AuditTotals audit;
  };
  std::vector<RepOutput> outputs(reps);

  ParallelFor(reps, [&](int rep) {
    RepOutput& out = outputs[rep];
    const auto r = static_cast<std::uint64_t>(rep);
    auto fail_all = [&](const std::vector<EnsembleMethod>& family,
                        const std::string& what) {
      for (EnsembleMethod m : family) {
        ReplicationRecord rec;
        rec.replication = rep;
        rec.method = m;
        rec.error = what;
        out.records.push_back(rec);
      }
    };
    std::vector<SiteFrame> frames;
    try {
      frames = GenerateSites(spec, r);
    } catch (const FedError& e) {
      fail_all(methods, e.what());
      return;
    }
    for (int family = 0; family < 2; ++family) {
      const std::vector<EnsembleMethod>& list = family == 0 ? common : robust;
      if (list.empty()) continue;
      ProtocolConfig config =
          family == 0 ? AipwFamilyConfig(spec, base) : MrFamilyConfig(spec, base);
      config.methods = list;
      config.seed = DeriveSeed(spec.seed, {r, 0xfa0u + static_cast<std::uint64_t>(family)});
      config.l1.seed = DeriveSeed(config.seed, {0xc7u});
      try {
        const RoundResult round = RunRound(frames, config);
        const AuditSummary audit = AuditLedger(round.ledger);
        ++out.audit.rounds;
        out.audit.violations += audit.violations;
        const int reporting = static_cast<int>(round.estimates.size()) - 1;
        if (audit.messages_by_kind !=
            ExpectedCensus(static_cast<int>(frames.size()), reporting)) {
          ++out.audit.census_mismatches;
        }
        for (const auto& [kind, bytes] : audit.bytes_by_kind) {
          out.audit.bytes += bytes;
        }
        if (options.keep_ledger) {
          for (const MessageRecord& m : round.ledger) {
            nlohmann::json line = ToJson(m);
            line["replication"] = rep;
            line["family"] = family == 0 ? "common" : "multiply_robust";
            out.ledger.push_back(line.dump());
          }
        }
        for (const GlobalReport& report : round.reports) {
          ReplicationRecord rec;
          rec.replication = rep;
          rec.method = report.method;
          rec.ok = std::isfinite(report.delta_hat) && std::isfinite(report.se);
          rec.delta_hat = report.delta_hat;
          rec.se = report.se;
          rec.ci_lo = report.ci[0];
          rec.ci_hi = report.ci[1];
          rec.covered = rec.ci_lo <= 0.0 && 0.0 <= rec.ci_hi;
          rec.lambda = report.solution.lambda[1];
          rec.eta.assign(spec.num_sites, 0.0);
          for (size_t k = 0; k < report.solution.site_ids.size(); ++k) {
            const std::string& id = report.solution.site_ids[k];
            for (int s = 0; s < spec.num_sites; ++s) {
              if (SiteName(s) == id) {
                rec.eta[s] = report.solution.eta[1](static_cast<Eigen::Index>(k));
              }
            }
          }
          if (!rec.ok) rec.error = "non-finite estimate";
          out.records.push_back(rec);
        }
      } catch (const FedError& e) {
        fail_all(list, e.what());
      }
    }
  }, options.threads);

  ScenarioResult result;
  for (RepOutput& out : outputs) {
    // Methods in the order requested.
    for (EnsembleMethod m : methods) {
      for (ReplicationRecord& rec : out.records) {
        if (rec.method == m) result.replications.push_back(std::move(rec));
      }
    }
    for (std::string& line : out.ledger) {
      result.ledger_lines.push_back(std::move(line));
    }
    result.audit.rounds += out.audit.rounds;
    result.audit.violations += out.audit.violations;
    result.audit.census_mismatches += out.audit.census_mismatches;
    result.audit.bytes += out.audit.bytes;
  }
  result.metrics = Aggregate(result.replications, methods, spec.name, 0.0);
  return result;
}

std::string MetricsCsv(const MetricsTable& table) {
  std::string out =
      "scenario,method,replications,failures,mae,rmse,bias,coverage,"
      "ci_length,mean_se,mc_sd\n";
  for (const MethodMetrics& m : table.methods) {
    out += table.scenario + "," + std::string(EnsembleMethodName(m.method)) +
           "," + std::to_string(m.replications) + "," +
           std::to_string(m.failures) + "," + Format(m.mae) + "," +
           Format(m.rmse) + "," + Format(m.bias) + "," + Format(m.coverage) +
           "," + Format(m.ci_length) + "," + Format(m.mean_se) + "," +
           Format(m.mc_sd) + "\n";
  }
  return out;
}

std::string ReplicationsCsv(const std::vector<ReplicationRecord>& records,
                            int num_sites) {
  std::string out =
      "replication,method,ok,delta_hat,se,ci_lo,ci_hi,covered,lambda";
  for (int s = 0; s < num_sites; ++s) out += ",eta_" + SiteName(s);
  out += "\n";
  for (const ReplicationRecord& r : records) {
    out += std::to_string(r.replication) + "," +
           std::string(EnsembleMethodName(r.method)) + "," +
           (r.ok ? "1" : "0") + "," + Format(r.delta_hat) + "," +
           Format(r.se) + "," + Format(r.ci_lo) + "," + Format(r.ci_hi) +
           "," + (r.covered ? "1" : "0") + "," + Format(r.lambda);
    for (int s = 0; s < num_sites; ++s) {
      out += "," + Format(s < static_cast<int>(r.eta.size()) ? r.eta[s] : 0.0);
    }
    out += "\n";
  }
  return out;
}

}  // namespace fedcausal
