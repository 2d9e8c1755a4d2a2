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
// Simulated one-round federation.
//
// The target site broadcasts the protocol configuration and its basis
// means; every source site fits its own nuisance models, solves its density
// ratio and uploads a SiteEstimate; the target, acting as coordinator,
// completes the target-unit part of each upload and forms the ensemble.
// Every payload crosses sites as serialized JSON and is recorded in a
// ledger with its size and SHA-256 digest.

#ifndef FEDCAUSAL_FEDRUNTIME_H_
#define FEDCAUSAL_FEDRUNTIME_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedcausal/density_ratio.h"
#include "fedcausal/federation.h"
#include "fedcausal/nuisance.h"
#include "fedcausal/site_frame.h"

namespace fedcausal {

enum class MessageKind { kConfig, kMomentSummary, kSiteEstimate };

std::string_view MessageKindName(MessageKind kind);
MessageKind ParseMessageKind(std::string_view name);

struct MessageRecord {
  std::string from_site;
  std::string to_site;
  MessageKind kind = MessageKind::kConfig;
  long payload_bytes = 0;
  std::string payload_digest;  // lowercase hex SHA-256
  int round = 0;
  std::string payload;         // serialized JSON as sent
};

std::string Sha256Hex(std::string_view data);

// Candidate models used at one site.
struct SiteModels {
  std::vector<CandidateSpec> treatment;
  std::vector<CandidateSpec> outcome;
};

struct ProtocolConfig {
  BasisSpec basis;
  SiteModels default_models;
  std::map<std::string, SiteModels> site_models;  // overrides by site id
  std::vector<EnsembleMethod> methods = {EnsembleMethod::kMrL1};
  double alpha = 0.05;
  L1Options l1;
  NuisanceOptions nuisance;  // seed is replaced per site
  std::uint64_t seed = 0;

  const SiteModels& ModelsFor(const std::string& site_id) const;
};

nlohmann::json ToJson(const ProtocolConfig& config);
ProtocolConfig ProtocolConfigFromJson(const nlohmann::json& j);

struct RoundResult {
  std::vector<GlobalReport> reports;  // one per configured method
  std::vector<SiteEstimate> estimates;
  std::vector<MessageRecord> ledger;
  std::vector<std::string> excluded_sites;
  std::vector<std::string> warnings;
};

// Runs the protocol with serialized transport. Throws kMissingTarget when
// the frames do not contain exactly one target.
RoundResult RunRound(const std::vector<SiteFrame>& frames,
                     const ProtocolConfig& config);

// The same computation composed directly, without transport or ledger.
RoundResult RunDirect(const std::vector<SiteFrame>& frames,
                      const ProtocolConfig& config);

// Combines site estimates with one method; used by both paths.
GlobalReport Ensemble(const std::vector<SiteEstimate>& estimates,
                      EnsembleMethod method, const ProtocolConfig& config);

struct AuditSummary {
  int violations = 0;
  std::map<std::string, int> messages_by_kind;
  std::map<std::string, long> bytes_by_kind;
};

// Checks digests, payload sizes and the field vocabulary of every message.
// Throws kPrivacyViolation when a payload carries unit-level covariate,
// outcome or treatment fields.
AuditSummary AuditLedger(const std::vector<MessageRecord>& ledger);

// Messages expected for one round with the given number of sites that
// delivered estimates: 1 config, (K-1) moment summaries, K estimates; none
// when there are no sources.
std::map<std::string, int> ExpectedCensus(int num_sites, int num_reporting);

nlohmann::json ToJson(const MessageRecord& record, bool with_payload = false);
std::string LedgerToJsonLines(const std::vector<MessageRecord>& ledger,
                              bool with_payload = false);

}  // namespace fedcausal

#endif  // FEDCAUSAL_FEDRUNTIME_H_
