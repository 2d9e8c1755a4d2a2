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

#include "fedcausal/fedruntime.h"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <set>
#include <utility>

#include "fedcausal/rng.h"
#include "fedcausal/site_estimator.h"
#include "fedcausal/status.h"

namespace fedcausal {
namespace {

constexpr char kCoordinator[] = "coordinator";
constexpr char kBroadcast[] = "*";

// Moves payloads between sites. With transport disabled the objects are
// handed over as they are and nothing is recorded.
class Transport {
 public:
  explicit Transport(bool enabled) : enabled_(enabled) {}

  bool enabled() const { return enabled_; }

  nlohmann::json Send(const std::string& from, const std::string& to,
                      MessageKind kind, int round,
                      const nlohmann::json& payload) {
    MessageRecord record;
    record.from_site = from;
    record.to_site = to;
    record.kind = kind;
    record.round = round;
    record.payload = payload.dump();
    record.payload_bytes = static_cast<long>(record.payload.size());
    record.payload_digest = Sha256Hex(record.payload);
    nlohmann::json received = nlohmann::json::parse(record.payload);
    ledger_.push_back(std::move(record));
    return received;
  }

  std::vector<MessageRecord> TakeLedger() { return std::move(ledger_); }

 private:
  bool enabled_;
  std::vector<MessageRecord> ledger_;
};


nlohmann::json ModelsToJson(const SiteModels& models) {
  nlohmann::json t = nlohmann::json::array();
  nlohmann::json o = nlohmann::json::array();
  for (const CandidateSpec& c : models.treatment) t.push_back(ToJson(c));
  for (const CandidateSpec& c : models.outcome) o.push_back(ToJson(c));
  return {{"treatment", t}, {"outcome", o}};
}

SiteModels ModelsFromJson(const nlohmann::json& j) {
  SiteModels models;
  for (const auto& c : j.at("treatment")) {
    models.treatment.push_back(CandidateSpecFromJson(c));
  }
  for (const auto& c : j.at("outcome")) {
    models.outcome.push_back(CandidateSpecFromJson(c));
  }
  return models;
}

NuisanceOptions SiteNuisanceOptions(const ProtocolConfig& config,
                                    size_t site_index) {
  NuisanceOptions options = config.nuisance;
  options.seed = DeriveSeed(config.seed, {0x6e75u, site_index});
  return options;
}

RoundResult Run(const std::vector<SiteFrame>& frames,
                const ProtocolConfig& coordinator_config, bool transport_on) {
  int target = -1;
  for (size_t k = 0; k < frames.size(); ++k) {
    if (frames[k].role != SiteRole::kTarget) continue;
    if (target >= 0) {
      throw FedError(ErrorCode::kInvalidArgument, "more than one target frame");
    }
    target = static_cast<int>(k);
  }
  if (target < 0) throw FedError(ErrorCode::kMissingTarget, "no target frame");
  for (const SiteFrame& f : frames) f.Validate();

  Transport transport(transport_on);
  RoundResult result;
  const SiteFrame& tframe = frames[target];
  const bool has_sources = frames.size() > 1;

  // Round 0: configuration and target basis means.
  ProtocolConfig config = coordinator_config;
  if (transport.enabled() && has_sources) {
    config = ProtocolConfigFromJson(
        transport.Send(tframe.site_id, kBroadcast, MessageKind::kConfig, 0,
                       ToJson(coordinator_config)));
  }
  const Matrix target_v = tframe.SharedCovariates();
  const BasisSpec basis =
      BasisSpec::For(config.basis.kind, static_cast<int>(target_v.cols()));
  const MomentSummary summary = TargetMoments(target_v, basis, tframe.site_id);

  std::vector<std::pair<size_t, SiteEstimate>> uploads;
  for (size_t k = 0; k < frames.size(); ++k) {
    if (static_cast<int>(k) == target) continue;
    const SiteFrame& source = frames[k];
    MomentSummary received = summary;
    if (transport.enabled()) {
      received = MomentSummaryFromJson(
          transport.Send(tframe.site_id, source.site_id,
                         MessageKind::kMomentSummary, 0, ToJson(summary)));
    }
    SiteEstimate estimate;
    try {
      const Matrix v = source.SharedCovariates();
      const TiltCoefficients tilt = SolveTilt(v, received, received.basis);
      const SiteModels& models = config.ModelsFor(source.site_id);
      const NuisanceFit fit = FitNuisance(source, models.treatment,
                                          models.outcome,
                                          SiteNuisanceOptions(config, k));
      estimate = EstimateSourceLocal(source, received, fit, tilt);
    } catch (const FedError& e) {
      result.excluded_sites.push_back(source.site_id);
      result.warnings.push_back("site '" + source.site_id +
                                "' excluded: " + e.what());
      continue;
    }
    uploads.emplace_back(k, std::move(estimate));
  }

  // Round 1: uploads to the coordinator, which is the target site.
  const SiteModels& tmodels = config.ModelsFor(tframe.site_id);
  const NuisanceFit tfit =
      FitNuisance(tframe, tmodels.treatment, tmodels.outcome,
                  SiteNuisanceOptions(config, static_cast<size_t>(target)));
  SiteEstimate target_estimate = EstimateTarget(tframe, tfit);
  if (transport.enabled() && has_sources) {
    target_estimate = SiteEstimateFromJson(
        transport.Send(tframe.site_id, kCoordinator, MessageKind::kSiteEstimate,
                       1, ToJson(target_estimate)));
  }
  // Estimates are kept in frame order.
  size_t next = 0;
  for (size_t k = 0; k < frames.size(); ++k) {
    if (static_cast<int>(k) == target) {
      result.estimates.push_back(target_estimate);
      continue;
    }
    if (next >= uploads.size() || uploads[next].first != k) continue;
    SiteEstimate est = std::move(uploads[next].second);
    ++next;
    if (transport.enabled()) {
      est = SiteEstimateFromJson(
          transport.Send(est.site_id, kCoordinator, MessageKind::kSiteEstimate,
                         1, ToJson(est)));
    }
    CompleteOnTarget(est, target_v);
    result.estimates.push_back(std::move(est));
  }

  const bool all_failed = has_sources && result.estimates.size() == 1;
  if (all_failed) {
    result.warnings.push_back(
        "AllSourcesFailed: every source was excluded; using the target only");
  }
  for (EnsembleMethod method : coordinator_config.methods) {
    GlobalReport report =
        Ensemble(result.estimates,
                 all_failed ? EnsembleMethod::kTargetOnly : method, config);
    report.method = method;
    report.warnings = result.warnings;
    result.reports.push_back(std::move(report));
  }
  result.ledger = transport.TakeLedger();
  return result;
}

const std::set<std::string>& AllowedFields(MessageKind kind) {
  static const std::set<std::string> config = {
      "basis", "default_models", "site_models", "methods",
      "alpha", "l1",             "nuisance",    "seed"};
  static const std::set<std::string> moments = {"site_id", "n", "basis",
                                                "mean_basis"};
  static const std::set<std::string> estimate = {
      "site_id", "role",   "mu0",          "mu1", "n_k",
      "n_t",     "xi_own", "xi_on_target", "tau", "diagnostics"};
  switch (kind) {
    case MessageKind::kConfig:
      return config;
    case MessageKind::kMomentSummary:
      return moments;
    case MessageKind::kSiteEstimate:
      return estimate;
  }
  return config;
}

// Field names that denote unit-level covariates, outcomes or treatments.
bool IsUnitLevelField(const std::string& key) {
  static const std::set<std::string> tagged = {
      "x", "X", "v", "V", "y", "Y", "a", "A", "covariates", "outcomes",
      "treatments", "rows", "units", "individual"};
  return tagged.count(key) > 0;
}

void ScanForUnitFields(const nlohmann::json& j, const MessageRecord& record) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (IsUnitLevelField(it.key())) {
        throw FedError(ErrorCode::kPrivacyViolation,
                       "message " + record.from_site + " -> " +
                           record.to_site + " carries unit-level field '" +
                           it.key() + "'");
      }
      ScanForUnitFields(it.value(), record);
    }
  } else if (j.is_array()) {
    for (const auto& e : j) ScanForUnitFields(e, record);
  }
}

}  // namespace

std::string_view MessageKindName(MessageKind kind) {
  switch (kind) {
    case MessageKind::kConfig:
      return "config";
    case MessageKind::kMomentSummary:
      return "moment_summary";
    case MessageKind::kSiteEstimate:
      return "site_estimate";
  }
  return "unknown";
}

MessageKind ParseMessageKind(std::string_view name) {
  if (name == "config") return MessageKind::kConfig;
  if (name == "moment_summary") return MessageKind::kMomentSummary;
  if (name == "site_estimate") return MessageKind::kSiteEstimate;
  throw FedError(ErrorCode::kSchemaError,
                 "unknown message kind '" + std::string(name) + "'");
}

std::string Sha256Hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length,
                 EVP_sha256(), nullptr) != 1) {
    throw FedError(ErrorCode::kInvalidArgument, "SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

const SiteModels& ProtocolConfig::ModelsFor(const std::string& site_id) const {
  const auto it = site_models.find(site_id);
  return it == site_models.end() ? default_models : it->second;
}

nlohmann::json ToJson(const ProtocolConfig& config) {
  nlohmann::json sites = nlohmann::json::object();
  for (const auto& [id, models] : config.site_models) {
    sites[id] = ModelsToJson(models);
  }
  nlohmann::json methods = nlohmann::json::array();
  for (EnsembleMethod m : config.methods) methods.push_back(EnsembleMethodName(m));
  const NuisanceOptions& n = config.nuisance;
  return {{"basis", {{"kind", BasisKindName(config.basis.kind)}}},
          {"default_models", ModelsToJson(config.default_models)},
          {"site_models", sites},
          {"methods", methods},
          {"alpha", config.alpha},
          {"l1",
           {{"mode", WeightModeName(config.l1.mode)},
            {"lambda_grid", config.l1.lambda_grid},
            {"cv_splits", config.l1.cv_splits},
            {"seed", config.l1.seed},
            {"bias_scale", BiasScaleName(config.l1.scaling.bias)},
            {"penalty_scale", PenaltyScaleName(config.l1.scaling.penalty)}}},
          {"nuisance",
           {{"train_fraction", n.train_fraction},
            {"kappa", n.kappa},
            {"clip", {n.clip_lo, n.clip_hi}},
            {"split_count", n.split_count}}},
          {"seed", config.seed}};
}

ProtocolConfig ProtocolConfigFromJson(const nlohmann::json& j) {
  try {
    ProtocolConfig config;
    if (j.contains("basis")) {
      config.basis.kind =
          ParseBasisKind(j.at("basis").at("kind").get<std::string>());
    }
    if (j.contains("default_models")) {
      config.default_models = ModelsFromJson(j.at("default_models"));
    }
    if (j.contains("site_models")) {
      for (auto it = j.at("site_models").begin();
           it != j.at("site_models").end(); ++it) {
        config.site_models[it.key()] = ModelsFromJson(it.value());
      }
    }
    if (j.contains("methods")) {
      config.methods.clear();
      for (const auto& m : j.at("methods")) {
        config.methods.push_back(ParseEnsembleMethod(m.get<std::string>()));
      }
    }
    config.alpha = j.value("alpha", config.alpha);
    if (j.contains("l1")) {
      const nlohmann::json& l1 = j.at("l1");
      if (l1.contains("mode")) {
        config.l1.mode = ParseWeightMode(l1.at("mode").get<std::string>());
      }
      config.l1.lambda_grid =
          l1.value("lambda_grid", config.l1.lambda_grid);
      config.l1.cv_splits = l1.value("cv_splits", config.l1.cv_splits);
      config.l1.seed = l1.value("seed", config.l1.seed);
      if (l1.contains("bias_scale")) {
        config.l1.scaling.bias =
            ParseBiasScale(l1.at("bias_scale").get<std::string>());
      }
      if (l1.contains("penalty_scale")) {
        config.l1.scaling.penalty =
            ParsePenaltyScale(l1.at("penalty_scale").get<std::string>());
      }
    }
    if (j.contains("nuisance")) {
      const nlohmann::json& n = j.at("nuisance");
      NuisanceOptions& o = config.nuisance;
      o.train_fraction = n.value("train_fraction", o.train_fraction);
      o.kappa = n.value("kappa", o.kappa);
      if (n.contains("clip")) {
        o.clip_lo = n.at("clip").at(0).get<double>();
        o.clip_hi = n.at("clip").at(1).get<double>();
      }
      o.split_count = n.value("split_count", o.split_count);
    }
    config.seed = j.value("seed", config.seed);
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw FedError(ErrorCode::kSchemaError, e.what());
  }
}

GlobalReport Ensemble(const std::vector<SiteEstimate>& estimates,
                      EnsembleMethod method, const ProtocolConfig& config) {
  EnsembleSolution solution;
  switch (method) {
    case EnsembleMethod::kTargetOnly:
      solution = CombineFixed(estimates, FixedScheme::kTargetOnly,
                              config.l1.mode);
      break;
    case EnsembleMethod::kSampleSize:
      solution = CombineFixed(estimates, FixedScheme::kSampleSize,
                              config.l1.mode);
      break;
    case EnsembleMethod::kInverseVariance:
      solution = CombineFixed(estimates, FixedScheme::kInverseVariance,
                              config.l1.mode);
      break;
    case EnsembleMethod::kAipwL1:
    case EnsembleMethod::kMrL1:
      solution = SolveL1Ensemble(estimates, config.l1);
      break;
  }
  return GlobalEstimate(estimates, solution, config.alpha, method);
}

RoundResult RunRound(const std::vector<SiteFrame>& frames,
                     const ProtocolConfig& config) {
  return Run(frames, config, /*transport_on=*/true);
}

RoundResult RunDirect(const std::vector<SiteFrame>& frames,
                      const ProtocolConfig& config) {
  return Run(frames, config, /*transport_on=*/false);
}

AuditSummary AuditLedger(const std::vector<MessageRecord>& ledger) {
  AuditSummary summary;
  for (const MessageRecord& record : ledger) {
    const std::string kind(MessageKindName(record.kind));
    summary.messages_by_kind[kind] += 1;
    summary.bytes_by_kind[kind] += record.payload_bytes;
    if (record.payload.empty()) continue;
    if (static_cast<long>(record.payload.size()) != record.payload_bytes ||
        Sha256Hex(record.payload) != record.payload_digest) {
      ++summary.violations;
    }
    nlohmann::json payload;
    try {
      payload = nlohmann::json::parse(record.payload);
    } catch (const nlohmann::json::exception&) {
      ++summary.violations;
      continue;
    }
    if (!payload.is_object()) {
      ++summary.violations;
      continue;
    }
    const std::set<std::string>& allowed = AllowedFields(record.kind);
    for (auto it = payload.begin(); it != payload.end(); ++it) {
      if (allowed.count(it.key()) == 0 && !IsUnitLevelField(it.key())) {
        ++summary.violations;
      }
    }
    ScanForUnitFields(payload, record);
  }
  return summary;
}

std::map<std::string, int> ExpectedCensus(int num_sites, int num_reporting) {
  std::map<std::string, int> census;
  if (num_sites <= 1) return census;
  census["config"] = 1;
  census["moment_summary"] = num_sites - 1;
  census["site_estimate"] = num_reporting + 1;
  return census;
}

nlohmann::json ToJson(const MessageRecord& record, bool with_payload) {
  nlohmann::json j = {{"round", record.round},
                      {"kind", MessageKindName(record.kind)},
                      {"from", record.from_site},
                      {"to", record.to_site},
                      {"payload_bytes", record.payload_bytes},
                      {"payload_digest", record.payload_digest}};
  if (with_payload) j["payload"] = nlohmann::json::parse(record.payload);
  return j;
}

std::string LedgerToJsonLines(const std::vector<MessageRecord>& ledger,
                              bool with_payload) {
  std::string out;
  for (const MessageRecord& r : ledger) {
    out += ToJson(r, with_payload).dump();
    out += '\n';
  }
  return out;
}

}  // namespace fedcausal
