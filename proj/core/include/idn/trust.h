/* Copyright 2026 The idnsim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "idn/caching.h"
#include "idn/descriptors.h"
#include "idn/registry.h"

namespace idn {

struct AttestationRecord {
  NodeId node_id;
  int trust = 0;
  Micros issue_time = 0;
  Micros validity = 0;

  Micros expires_at() const { return issue_time + validity; }
};

struct LineageRecord {
  RealizationId realization_id;
  std::vector<std::string> chain;  // one digest per derivation step
  bool revoked = false;
};

struct VerdictResult {
  Verdict verdict = Verdict::kAllowed;
  std::string reason;
};

struct RevocationEffects {
  std::vector<std::pair<NodeId, RealizationId>> evictions;
  std::vector<std::string> invalidated_states;
};

// Node trust over time plus realization lineage. Nodes without an
// attestation keep their registered trust indefinitely; an attested node
// drops to 0 once its attestation lapses.
class TrustManager {
 public:
  explicit TrustManager(CapabilityCatalog& catalog) : catalog_(&catalog) {}

  void set_base_trust(const NodeId& node_id, int trust) { base_[node_id] = trust; }
  void attest(const AttestationRecord& record);
  const AttestationRecord* attestation(const NodeId& node_id) const;

  int effective_trust(const NodeId& node_id, Micros now) const;
  bool expired(const NodeId& node_id, Micros now) const;

  LineageRecord lineage(const RealizationId& realization_id) const;
  bool revoked(const RealizationId& realization_id) const {
    return catalog_->is_revoked(realization_id);
  }

  // Flags the lineage, invalidates dependent cached state and lists the
  // placements that must drain. Throws IdnError(kUnknownRealization).
  RevocationEffects revoke(const RealizationId& realization_id, const ResourceBroker& broker,
                           CacheManager* cache, Micros now);

  // Dispatch-time re-check of a routed plan.
  VerdictResult verdict(const RequestDescriptor& q, const std::vector<PlanStage>& stages,
                        bool degraded, Micros now) const;

 private:
  CapabilityCatalog* catalog_;
  std::map<NodeId, int> base_;
  std::map<NodeId, AttestationRecord> attestations_;
};

// Append-only, one receipt per request.
class ReceiptLog {
 public:
  // Throws IdnError(kInvariantViolation) on a repeated request id.
  void append(ExecutionReceipt receipt);

  std::size_t size() const { return receipts_.size(); }
  const std::vector<ExecutionReceipt>& receipts() const { return receipts_; }
  bool contains(const std::string& request_id) const { return ids_.count(request_id) != 0; }

  // One compact JSON object per line.
  void write_jsonl(std::ostream& out) const;
  std::string to_jsonl() const;

 private:
  std::vector<ExecutionReceipt> receipts_;
  std::set<std::string> ids_;
};

std::vector<ExecutionReceipt> read_receipts_jsonl(std::istream& in);

}  // namespace idn
