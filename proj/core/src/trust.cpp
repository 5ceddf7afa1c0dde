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

#include "idn/trust.h"

#include <istream>
#include <ostream>
#include <sstream>

#include "idn/digest.h"
#include "idn/serialize.h"

namespace idn {

void TrustManager::attest(const AttestationRecord& record) {
  if (record.trust < kMinTrust || record.trust > kMaxTrust || record.validity < 0) {
    throw IdnError(ErrorCode::kInvariantViolation,
                   record.node_id + ": attestation needs trust in [0, 3] and validity >= 0");
  }
  attestations_[record.node_id] = record;
}

const AttestationRecord* TrustManager::attestation(const NodeId& node_id) const {
  auto it = attestations_.find(node_id);
  return it == attestations_.end() ? nullptr : &it->second;
}

bool TrustManager::expired(const NodeId& node_id, Micros now) const {
  const auto* a = attestation(node_id);
  return a != nullptr && now >= a->expires_at();
}

int TrustManager::effective_trust(const NodeId& node_id, Micros now) const {
  if (const auto* a = attestation(node_id)) return now >= a->expires_at() ? 0 : a->trust;
  auto it = base_.find(node_id);
  return it == base_.end() ? 0 : it->second;
}

LineageRecord TrustManager::lineage(const RealizationId& realization_id) const {
  const auto& variant = catalog_->variant_of(realization_id);
  const auto& cls = catalog_->capability(variant.class_name);
  LineageRecord rec;
  rec.realization_id = realization_id;
  for (const auto& e : cls.lineage) {
    rec.chain.push_back(canonical_digest({e.parent_model, e.derivation}));
  }
  rec.revoked = catalog_->is_revoked(realization_id);
  return rec;
}

RevocationEffects TrustManager::revoke(const RealizationId& realization_id,
                                       const ResourceBroker& broker, CacheManager* cache,
                                       Micros now) {
  if (!catalog_->has_realization(realization_id)) {
    throw IdnError(ErrorCode::kUnknownRealization, realization_id);
  }
  catalog_->mark_revoked(realization_id);
  RevocationEffects fx;
  for (const auto& node : broker.node_ids()) {
    for (const auto& r : broker.profile(node).state.resident) {
      if (r.realization_id == realization_id) fx.evictions.emplace_back(node, realization_id);
    }
  }
  if (cache != nullptr) fx.invalidated_states = cache->invalidate_realization(realization_id, now);
  return fx;
}

VerdictResult TrustManager::verdict(const RequestDescriptor& q,
                                    const std::vector<PlanStage>& stages, bool degraded,
                                    Micros now) const {
  for (const auto& s : stages) {
    if (effective_trust(s.node_id, now) < q.policy.min_trust) {
      return {Verdict::kRejected, expired(s.node_id, now) ? "TrustExpired" : "TrustBelowMinimum"};
    }
    if (catalog_->is_revoked(s.realization_id)) return {Verdict::kRejected, "LineageRevoked"};
  }
  if (degraded) return {Verdict::kDegraded, "QualityDowngrade"};
  return {Verdict::kAllowed, ""};
}

void ReceiptLog::append(ExecutionReceipt receipt) {
  if (!ids_.insert(receipt.request_id).second) {
    throw IdnError(ErrorCode::kInvariantViolation,
                   "second receipt for request '" + receipt.request_id + "'");
  }
  receipts_.push_back(std::move(receipt));
}

void ReceiptLog::write_jsonl(std::ostream& out) const {
  for (const auto& r : receipts_) out << Json(r).dump() << '\n';
}

std::string ReceiptLog::to_jsonl() const {
  std::ostringstream out;
  write_jsonl(out);
  return out.str();
}

std::vector<ExecutionReceipt> read_receipts_jsonl(std::istream& in) {
  std::vector<ExecutionReceipt> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw IdnError(ErrorCode::kParseError,
                     "receipt line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(decode_as<ExecutionReceipt>(j, "line " + std::to_string(line_no)));
  }
  return out;
}

}  // namespace idn
