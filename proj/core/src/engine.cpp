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

#include "idn/engine.h"

#include <algorithm>
#include <ostream>
#include <queue>
#include <set>
#include <tuple>

#include "idn/workload.h"

namespace idn {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kArrival: return "arrival";
    case EventKind::kDispatch: return "dispatch";
    case EventKind::kStageStart: return "stage_start";
    case EventKind::kStageComplete: return "stage_complete";
    case EventKind::kTransferComplete: return "transfer_complete";
    case EventKind::kEpochReplan: return "epoch_replan";
    case EventKind::kSessionEnd: return "session_end";
    case EventKind::kNodeOffline: return "node_offline";
    case EventKind::kNodeOnline: return "node_online";
    case EventKind::kRevoke: return "revoke";
    case EventKind::kAttestation: return "attestation";
    case EventKind::kAttestationExpiry: return "attestation_expiry";
    case EventKind::kLoadComplete: return "load_complete";
    case EventKind::kMigrationComplete: return "migration_complete";
  }
  return "unknown";
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << "time,seq,kind,request_id,node_id,detail\n";
  for (const auto& r : rows) {
    out << r.time << ',' << r.seq << ',' << r.kind << ',' << r.request_id << ',' << r.node_id
        << ',' << r.detail << '\n';
  }
}

namespace {

constexpr int kResponseLeg = -1;

struct Event {
  Micros time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kArrival;
  std::size_t index = 0;  // request, script entry or ticket, by kind
  int stage = 0;
  std::string key;        // node, session or realization id, by kind
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
  }
};

struct NodeRuntime {
  std::vector<Micros> slots;  // when each execution slot frees up
  int queue_length = 0;       // reserved stages not yet started
  int running = 0;
  std::multiset<Micros> running_until;  // end times of started stages
  Micros busy = 0;
  Bytes budget = 0;
  Bytes free_memory = 0;
  std::vector<Residency> resident;
  std::map<RealizationId, int> in_flight;
  int peak_queue = 0;
  int peak_running = 0;
};

struct InFlight {
  Selection sel;
  RequestTimeline timeline;
  std::vector<NodeAttestation> attestations;
  std::vector<std::string> state_ids;
  std::vector<bool> started;
  bool prefix_eligible = false;
  bool prefix_hit = false;
  bool done = false;
};

class Simulator {
 public:
  Simulator(const Scenario& scenario, const RunOptions& options);
  RunResult run();
  OracleReport oracle(Micros at);

 private:
  void schedule(Micros time, EventKind kind, std::size_t index = 0, int stage = 0,
                std::string key = {});
  void trace(const std::string& kind, const std::string& request_id, const NodeId& node,
             std::string detail);
  void push_telemetry(const NodeId& node);
  void refresh_telemetry();
  Micros reserve_slot(NodeRuntime& n, Micros ready, Micros length);
  void retire_finished(NodeRuntime& n);
  bool prefix_eligible(const RequestDescriptor& q) const;
  std::string prefix_hash(const RequestDescriptor& q, const RealizationId& rid) const;

  void on_arrival(std::size_t i);
  void reserve(std::size_t i);
  void on_dispatch(std::size_t i);
  void on_stage_start(std::size_t i, int stage);
  void on_stage_complete(std::size_t i, int stage);
  void on_transfer_complete(std::size_t i, int stage);
  void on_epoch();
  void on_revoke(const RealizationId& rid);
  void on_attestation(std::size_t index);
  void on_attestation_expiry(const NodeId& node);
  void on_migration_complete(std::size_t ticket);

  void admit_prefix(std::size_t i);
  void activate(const NodeId& node, const RealizationId& rid, Micros ready_at, Micros activation);
  void drain(const NodeId& node, const RealizationId& rid);
  void evict_if_idle(const NodeId& node, const RealizationId& rid);
  void cancel_unstarted(std::size_t i);
  void finish_served(std::size_t i);
  void finish_rejected(std::size_t i, const std::string& reason, bool admitted, Outcome outcome);

  const Scenario& scenario_;
  RunOptions options_;
  std::uint64_t seed_;
  Micros duration_;

  Topology topology_;
  CapabilityCatalog catalog_;
  std::unique_ptr<ResourceBroker> broker_;
  CacheManager cache_;
  TrustManager trust_;
  std::unique_ptr<Router> router_;
  DemandWindow demand_;
  Placement pinned_;

  std::vector<RequestDescriptor> requests_;
  std::map<std::string, Micros> session_last_;
  std::vector<InFlight> flights_;
  std::map<NodeId, NodeRuntime> nodes_;
  std::vector<MigrationTicket> tickets_;

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_seq_ = 0;
  Micros now_ = 0;
  std::uint64_t current_seq_ = 0;

  ReceiptLog receipts_;
  std::vector<RequestRecord> records_;
  std::vector<TraceRow> trace_;
  CoreTrafficMeter core_;
  std::int64_t churn_ = 0;
  Micros load_overhead_ = 0;
};

Simulator::Simulator(const Scenario& scenario, const RunOptions& options)
    : scenario_(scenario),
      options_(options),
      seed_(options.seed.value_or(scenario.seed)),
      duration_(options.duration.value_or(scenario.duration)),
      cache_([&] {
        CacheConfig c = scenario.cache;
        if (options.cache_enabled) c.enabled = *options.cache_enabled;
        return c;
      }()),
      trust_(catalog_),
      demand_(scenario.placement.window) {
  auto violations = validate_scenario(scenario);
  if (duration_ <= 0) violations.push_back({"duration", "duration > 0"});
  if (!violations.empty()) {
    std::string msg;
    for (const auto& v : violations) msg += "\n  " + v.path + ": " + v.message;
    throw IdnError(ErrorCode::kScenarioInvalid, std::to_string(violations.size()) +
                                                    " violation(s)" + msg);
  }

  topology_ = Topology(scenario.regions, scenario.nodes, scenario.domains, scenario.links);
  for (const auto& c : scenario.classes) catalog_.add_class(c);
  for (const auto& v : scenario.variants) catalog_.add_variant(v);
  for (const auto& r : scenario.realizations) catalog_.add_realization(r);

  broker_ = std::make_unique<ResourceBroker>(topology_, catalog_);
  auto is_cloud = [](const ResourceProfile& p) { return p.locality.tier == Tier::kCloud; };
  if (options.cloud_only) broker_->set_host_filter(is_cloud);

  for (const auto& n : scenario.nodes) {
    ResourceProfile p = n.profile;
    p.state = NodeState{};
    p.state.free_memory = p.capacity.memory_budget;
    broker_->register_node(p);
    if (!n.online) broker_->set_online(n.node_id, false);
    trust_.set_base_trust(n.node_id, p.trust);
    cache_.add_node(n.node_id, p.capacity.state_capacity);

    NodeRuntime rt;
    rt.slots.assign(static_cast<std::size_t>(p.capacity.max_concurrent), 0);
    rt.budget = p.capacity.memory_budget;
    rt.free_memory = p.capacity.memory_budget;
    nodes_.emplace(n.node_id, std::move(rt));
  }
  for (const auto& e : scenario.initial_placement) {
    const auto& prof = broker_->profile(e.node_id);
    if (options.cloud_only && !is_cloud(prof)) continue;
    auto& rt = nodes_.at(e.node_id);
    rt.resident.push_back({e.realization_id, 0, false});
    rt.free_memory -= catalog_.realization(e.realization_id).memory;
    if (e.pinned) pinned_.emplace(e.realization_id, e.node_id);
  }
  for (const auto& [id, rt] : nodes_) push_telemetry(id);

  RoutingConfig rc = scenario.routing;
  if (options.weights) rc.weights = *options.weights;
  router_ = std::make_unique<Router>(*broker_, &cache_, rc);

  auto arrivals = generate_arrivals(scenario.workload, duration_, seed_);
  requests_ = std::move(arrivals.requests);
  session_last_ = std::move(arrivals.session_last_arrival);
  for (const auto& q : scenario.requests) {
    if (q.arrival_time < duration_) requests_.push_back(q);
  }
  std::stable_sort(requests_.begin(), requests_.end(),
                   [](const RequestDescriptor& a, const RequestDescriptor& b) {
                     return std::tie(a.arrival_time, a.request_id) <
                            std::tie(b.arrival_time, b.request_id);
                   });
  std::set<std::string> ids;
  for (const auto& q : requests_) {
    if (!ids.insert(q.request_id).second) {
      throw IdnError(ErrorCode::kScenarioInvalid, "duplicate request id '" + q.request_id + "'");
    }
  }
  flights_.resize(requests_.size());
}

void Simulator::schedule(Micros time, EventKind kind, std::size_t index, int stage,
                         std::string key) {
  if (time < now_) {
    throw IdnError(ErrorCode::kInvariantViolation,
                   "event '" + std::string(to_string(kind)) + "' scheduled in the past");
  }
  queue_.push(Event{time, next_seq_++, kind, index, stage, std::move(key)});
}

void Simulator::trace(const std::string& kind, const std::string& request_id, const NodeId& node,
                      std::string detail) {
  if (!options_.trace) return;
  trace_.push_back({now_, current_seq_, kind, request_id, node, std::move(detail)});
}

void Simulator::push_telemetry(const NodeId& node) {
  const auto& rt = nodes_.at(node);
  NodeTelemetry t;
  const Micros earliest = *std::min_element(rt.slots.begin(), rt.slots.end());
  t.queued_work = std::max<Micros>(0, earliest - now_);
  t.free_memory = rt.free_memory;
  t.resident = rt.resident;
  t.running = rt.running;
  t.queue_length = rt.queue_length;
  broker_->update_telemetry(node, t);
}

void Simulator::refresh_telemetry() {
  for (const auto& [id, rt] : nodes_) push_telemetry(id);
}

Micros Simulator::reserve_slot(NodeRuntime& n, Micros ready, Micros length) {
  auto slot = std::min_element(n.slots.begin(), n.slots.end());
  const Micros start = std::max(ready, *slot);
  *slot = start + length;
  return start;
}

// A stage ending now frees its slot for one starting now, whichever event
// the queue happens to deliver first.
void Simulator::retire_finished(NodeRuntime& n) {
  n.running_until.erase(n.running_until.begin(), n.running_until.upper_bound(now_));
  n.running = static_cast<int>(n.running_until.size());
}

bool Simulator::prefix_eligible(const RequestDescriptor& q) const {
  return cache_.config().enabled && q.affinity_token.has_value() && q.prefix_tokens > 0;
}

std::string Simulator::prefix_hash(const RequestDescriptor& q, const RealizationId& rid) const {
  const auto& r = catalog_.realization(rid);
  return compatibility_hash(rid, r.tokenizer, q.decoding_config, q.prefix_digest);
}

RunResult Simulator::run() {
  for (std::size_t i = 0; i < requests_.size(); ++i) {
    schedule(requests_[i].arrival_time, EventKind::kArrival, i);
  }
  for (const auto& [session, last] : session_last_) {
    schedule(last + scenario_.session_linger, EventKind::kSessionEnd, 0, 0, session);
  }
  if (scenario_.placement.enabled) {
    schedule(scenario_.placement.epoch, EventKind::kEpochReplan);
  }
  for (const auto& r : scenario_.revocations) {
    schedule(r.at, EventKind::kRevoke, 0, 0, r.realization_id);
  }
  for (std::size_t i = 0; i < scenario_.attestations.size(); ++i) {
    schedule(scenario_.attestations[i].issue_time, EventKind::kAttestation, i);
  }
  for (const auto& e : scenario_.node_events) {
    schedule(e.at, e.kind == NodeEventKind::kOffline ? EventKind::kNodeOffline
                                                      : EventKind::kNodeOnline,
             0, 0, e.node_id);
  }

  while (!queue_.empty() && queue_.top().time < duration_) {
    const Event ev = queue_.top();
    queue_.pop();
    now_ = ev.time;
    current_seq_ = ev.seq;
    switch (ev.kind) {
      case EventKind::kArrival: on_arrival(ev.index); break;
      case EventKind::kDispatch: on_dispatch(ev.index); break;
      case EventKind::kStageStart: on_stage_start(ev.index, ev.stage); break;
      case EventKind::kStageComplete: on_stage_complete(ev.index, ev.stage); break;
      case EventKind::kTransferComplete: on_transfer_complete(ev.index, ev.stage); break;
      case EventKind::kEpochReplan: on_epoch(); break;
      case EventKind::kSessionEnd: {
        const auto dropped = cache_.session_end(ev.key, now_);
        trace("session_end", "", "", ev.key + " dropped=" + std::to_string(dropped.size()));
        break;
      }
      case EventKind::kNodeOffline:
      case EventKind::kNodeOnline: {
        const bool online = ev.kind == EventKind::kNodeOnline;
        broker_->set_online(ev.key, online);
        trace(online ? "node_online" : "node_offline", "", ev.key, "");
        break;
      }
      case EventKind::kRevoke: on_revoke(ev.key); break;
      case EventKind::kAttestation: on_attestation(ev.index); break;
      case EventKind::kAttestationExpiry: on_attestation_expiry(ev.key); break;
      case EventKind::kLoadComplete: trace("load_complete", "", ev.key, ""); break;
      case EventKind::kMigrationComplete: on_migration_complete(ev.index); break;
    }
  }

  // Horizon: whatever is still in flight is reported apart from the served.
  now_ = duration_;
  for (std::size_t i = 0; i < requests_.size(); ++i) {
    if (requests_[i].arrival_time < duration_ && !flights_[i].done &&
        !flights_[i].sel.plan.stages.empty()) {
      finish_rejected(i, "HorizonTruncated", true, Outcome::kTruncated);
    }
  }

  RunResult out;
  out.seed = seed_;
  out.duration = duration_;
  auto& m = out.metrics;
  m.seed = seed_;
  m.duration = duration_;
  m.records = std::move(records_);
  m.totals = aggregate(m.records);
  m.hit_ratio_by_state_type = {{"artifact", 0.0},
                               {"prefix", m.totals.prefix_hit_ratio},
                               {"result", 0.0},
                               {"tensor_state", 0.0}};
  for (const auto& [id, rt] : nodes_) {
    const double capacity = static_cast<double>(duration_) * static_cast<double>(rt.slots.size());
    m.node_utilization[id] = capacity > 0 ? static_cast<double>(rt.busy) / capacity : 0.0;
    m.peak_queue_length[id] = rt.peak_queue;
    m.peak_running[id] = rt.peak_running;
  }
  m.core_bytes = core_.total();
  m.placement_churn = churn_;
  m.model_load_overhead = load_overhead_;
  for (const auto& q : requests_) ++m.demand_by_class_region[q.capability_class + "@" + q.origin_region];
  out.receipts = std::move(receipts_);
  out.trace = std::move(trace_);
  out.cache_events = cache_.events();
  out.requests = std::move(requests_);
  return out;
}

OracleReport Simulator::oracle(Micros at) {
  now_ = at;
  for (const auto& q : requests_) {
    if (q.arrival_time <= at) demand_.record(q);
  }
  refresh_telemetry();
  const auto& ps = scenario_.placement;
  OracleReport r;
  r.problem = build_problem(*broker_, *router_, demand_.cells(at, ps.epoch), ps.weights);
  r.exact = solve_exact(r.problem);
  r.exact_objective = objective(r.problem, r.exact);
  r.heuristic = improve_local_search(r.problem, solve_greedy(r.problem), ps.max_rounds);
  r.heuristic_objective = objective(r.problem, r.heuristic);
  return r;
}

void Simulator::on_arrival(std::size_t i) {
  const auto& q = requests_[i];
  demand_.record(q);
  refresh_telemetry();
  trace("arrival", q.request_id, "", q.capability_class + "@" + q.origin_region);

  auto& fl = flights_[i];
  fl.sel = router_->select(q, now_);
  if (options_.on_route) {
    options_.on_route(RouteAudit{q, now_, fl.sel, *broker_, cache_, *router_});
  }
  if (!fl.sel.served) {
    trace("route", q.request_id, "", "rejected " + fl.sel.reason);
    finish_rejected(i, fl.sel.reason, false, Outcome::kRejected);
    return;
  }
  trace("route", q.request_id, fl.sel.plan.stages.front().node_id,
        "plan=" + fl.sel.plan.plan_id + " total=" + format_fixed(fl.sel.cost.terms.total));
  reserve(i);
}

void Simulator::reserve(std::size_t i) {
  const auto& q = requests_[i];
  auto& fl = flights_[i];
  const auto& plan = fl.sel.plan;
  const auto& cost = fl.sel.cost;
  const auto& first = plan.stages.front();
  const Bytes bpt = router_->config().bytes_per_token;

  if (plan.cold) {
    const auto& r = catalog_.realization(first.realization_id);
    const auto& repo = router_->config().repository;
    Micros fetch = 0;
    if (!repo.empty()) {
      const auto& path = topology_.path(repo, first.node_id);
      fetch = transfer_time(path, r.artifact_size);
      core_.record(path, r.artifact_size);
    }
    activate(first.node_id, first.realization_id, now_ + fetch + r.load_time, fetch + r.load_time);
  }

  fl.prefix_eligible = prefix_eligible(q);
  if (fl.prefix_eligible) {
    const auto hash = prefix_hash(q, first.realization_id);
    const auto hit = cache_.lookup(first.node_id, hash, scope_key_of(q), now_);
    if (cost.state_local && hit) {
      fl.state_ids.push_back(hit->state_id);
      fl.prefix_hit = cost.covered_tokens > 0;
    } else if (cost.state_source && cost.state_migrate) {
      const auto& src = *cost.state_source;
      const auto ticket = cache_.migrate(src.state_id, src.node_id, first.node_id,
                                         trust_.effective_trust(first.node_id, now_), topology_,
                                         now_);
      core_.record(topology_.path(src.node_id, first.node_id), ticket.bytes);
      tickets_.push_back(ticket);
      schedule(ticket.available_at, EventKind::kMigrationComplete, tickets_.size() - 1);
      fl.state_ids.push_back(src.state_id);
      fl.prefix_hit = cost.covered_tokens > 0;
      trace("migrate", q.request_id, first.node_id, src.state_id + " from " + src.node_id);
    }
  }
  core_.record(topology_.path(q.origin_region, first.node_id), q.input_tokens * bpt);

  fl.timeline.arrival = now_;
  Micros ready = now_ + cost.inbound + cost.terms.t_state;
  for (std::size_t s = 0; s < plan.stages.size(); ++s) {
    const auto& st = plan.stages[s];
    auto& rt = nodes_.at(st.node_id);
    if (s > 0) ready = fl.timeline.stages.back().end() + cost.kv_transfer;
    const Micros start = reserve_slot(rt, ready, cost.stages[s].total());
    fl.timeline.stages.push_back({ready, start, cost.stages[s]});
    ++rt.queue_length;
    rt.peak_queue = std::max(rt.peak_queue, rt.queue_length);
    ++rt.in_flight[st.realization_id];
    trace("reserve", q.request_id, st.node_id,
          "stage=" + std::to_string(s) + " ready=" + std::to_string(ready) +
              " start=" + std::to_string(start));
  }
  fl.timeline.response = cost.response;
  fl.started.assign(plan.stages.size(), false);
  for (const auto& st : plan.stages) push_telemetry(st.node_id);
  schedule(fl.timeline.stages.front().ready, EventKind::kDispatch, i);
}

void Simulator::on_dispatch(std::size_t i) {
  const auto& q = requests_[i];
  auto& fl = flights_[i];
  const auto& stages = fl.sel.plan.stages;

  fl.attestations.clear();
  for (const auto& s : stages) {
    fl.attestations.push_back({s.node_id, trust_.effective_trust(s.node_id, now_), now_});
  }
  std::string reason;
  for (const auto& s : stages) {
    if (!broker_->online(s.node_id)) {
      reason = "NodeOffline";
      break;
    }
  }
  if (reason.empty()) {
    const auto v = trust_.verdict(q, stages, fl.sel.degraded, now_);
    if (v.verdict == Verdict::kRejected) reason = v.reason;
  }
  if (!reason.empty()) {
    trace("dispatch", q.request_id, stages.front().node_id, "rejected " + reason);
    cancel_unstarted(i);
    finish_rejected(i, reason, true, Outcome::kRejected);
    return;
  }
  const auto& span = fl.timeline.stages.front();
  trace("dispatch", q.request_id, stages.front().node_id,
        "stage=0 queue=" + std::to_string(span.start - span.ready));
  schedule(span.start, EventKind::kStageStart, i, 0);
}

void Simulator::on_stage_start(std::size_t i, int stage) {
  auto& fl = flights_[i];
  if (fl.done) return;
  const auto& node = fl.sel.plan.stages[stage].node_id;
  auto& rt = nodes_.at(node);
  --rt.queue_length;
  retire_finished(rt);
  rt.running_until.insert(fl.timeline.stages[stage].end());
  ++rt.running;
  rt.peak_running = std::max(rt.peak_running, rt.running);
  fl.started[stage] = true;
  trace("stage_start", requests_[i].request_id, node, "stage=" + std::to_string(stage));
  schedule(fl.timeline.stages[stage].end(), EventKind::kStageComplete, i, stage);
}

void Simulator::on_stage_complete(std::size_t i, int stage) {
  auto& fl = flights_[i];
  const auto& st = fl.sel.plan.stages[stage];
  auto& rt = nodes_.at(st.node_id);
  const auto& span = fl.timeline.stages[stage];
  retire_finished(rt);
  rt.busy += span.timing.total();
  --rt.in_flight[st.realization_id];
  trace("stage_complete", requests_[i].request_id, st.node_id, "stage=" + std::to_string(stage));
  if (stage == 0) admit_prefix(i);
  evict_if_idle(st.node_id, st.realization_id);

  const bool last = static_cast<std::size_t>(stage) + 1 == fl.sel.plan.stages.size();
  if (last) {
    schedule(span.end() + fl.timeline.response, EventKind::kTransferComplete, i, kResponseLeg);
  } else {
    schedule(fl.timeline.stages[stage + 1].ready, EventKind::kTransferComplete, i, stage + 1);
  }
}

void Simulator::on_transfer_complete(std::size_t i, int stage) {
  const auto& q = requests_[i];
  auto& fl = flights_[i];
  const auto& stages = fl.sel.plan.stages;
  if (stage == kResponseLeg) {
    core_.record(topology_.path(stages.back().node_id, q.origin_region),
                 q.output_tokens * router_->config().bytes_per_token);
    trace("transfer_complete", q.request_id, stages.back().node_id, "response");
    finish_served(i);
    return;
  }
  const auto& prev = stages[stage - 1];
  const auto& r = catalog_.realization(prev.realization_id);
  core_.record(topology_.path(prev.node_id, stages[stage].node_id),
               q.input_tokens * r.kv_bytes_per_token);
  trace("transfer_complete", q.request_id, stages[stage].node_id, "kv");
  const auto& span = fl.timeline.stages[stage];
  trace("dispatch", q.request_id, stages[stage].node_id,
        "stage=" + std::to_string(stage) + " queue=" + std::to_string(span.start - span.ready));
  schedule(span.start, EventKind::kStageStart, i, stage);
}

void Simulator::admit_prefix(std::size_t i) {
  const auto& q = requests_[i];
  auto& fl = flights_[i];
  if (!fl.prefix_eligible || !fl.state_ids.empty()) return;
  const auto& st = fl.sel.plan.stages.front();
  const auto& r = catalog_.realization(st.realization_id);
  const auto& prof = broker_->profile(st.node_id);

  StateDescriptor s;
  s.compatibility_hash = prefix_hash(q, st.realization_id);
  s.state_id = "px-" + s.compatibility_hash.substr(0, 16);
  s.state_type = StateType::kPrefix;
  s.sharing_scope = SharingScope::kSessionPrivate;
  s.size = q.prefix_tokens * r.kv_bytes_per_token;
  s.privacy_label = q.policy.data_class;
  s.decoding_config = q.decoding_config;
  s.migration_cost = s.size;

  BenefitInputs in;
  in.p_hit = 0.5;  // Laplace prior of an entry with no history
  in.delta_latency = static_cast<double>(
      scaled_time(q.prefix_tokens, r.prefill_time_per_token, prof.hardware.speed_factor));
  in.storage_cost = cache_.storage_cost(s.size);
  const auto res = cache_.admit(st.node_id, trust_.effective_trust(st.node_id, now_), s,
                                st.realization_id, scope_key_of(q), q.prefix_tokens, in, now_);
  trace(res.admitted ? "cache_admit" : "cache_reject", q.request_id, st.node_id,
        s.state_id + (res.admitted ? "" : " " + res.reason));
}

void Simulator::on_migration_complete(std::size_t index) {
  const auto& t = tickets_[index];
  const auto* entry = [&]() -> const CacheEntry* {
    const auto& entries = cache_.store(t.src).entries();
    auto it = entries.find(t.state_id);
    return it == entries.end() ? nullptr : &it->second;
  }();
  BenefitInputs in;
  if (entry != nullptr) {
    const auto& r = catalog_.realization(entry->realization_id);
    in.p_hit = 0.5;
    in.delta_latency = static_cast<double>(scaled_time(
        entry->covered_tokens, r.prefill_time_per_token,
        broker_->profile(t.dst).hardware.speed_factor));
    in.storage_cost = cache_.storage_cost(entry->state.size);
  }
  const auto res =
      cache_.complete_migration(t, trust_.effective_trust(t.dst, now_), in, now_);
  trace("migration_complete", "", t.dst, t.state_id + (res.admitted ? "" : " " + res.reason));
}

void Simulator::activate(const NodeId& node, const RealizationId& rid, Micros ready_at,
                         Micros activation) {
  auto& rt = nodes_.at(node);
  rt.resident.push_back({rid, ready_at, false});
  rt.free_memory -= catalog_.realization(rid).memory;
  ++churn_;
  load_overhead_ += activation;
  trace("load_start", "", node, rid + " ready_at=" + std::to_string(ready_at));
  schedule(ready_at, EventKind::kLoadComplete, 0, 0, node);
  push_telemetry(node);
}

void Simulator::drain(const NodeId& node, const RealizationId& rid) {
  auto& rt = nodes_.at(node);
  for (auto& r : rt.resident) {
    if (r.realization_id == rid) r.draining = true;
  }
  evict_if_idle(node, rid);
  push_telemetry(node);
}

void Simulator::evict_if_idle(const NodeId& node, const RealizationId& rid) {
  auto& rt = nodes_.at(node);
  auto it = std::find_if(rt.resident.begin(), rt.resident.end(),
                         [&](const Residency& r) { return r.realization_id == rid; });
  if (it == rt.resident.end() || !it->draining || rt.in_flight[rid] > 0) return;
  rt.resident.erase(it);
  rt.free_memory += catalog_.realization(rid).memory;
  ++churn_;
  trace("evict", "", node, rid);
  push_telemetry(node);
}

void Simulator::on_epoch() {
  refresh_telemetry();
  const auto& ps = scenario_.placement;
  const auto cells = demand_.cells(now_, ps.epoch);
  const auto problem = build_problem(*broker_, *router_, cells, ps.weights);
  const auto delta = replan(problem, pinned_, now_, ps.max_rounds);
  trace("epoch_replan", "", "",
        "before=" + format_fixed(delta.objective_before) + " after=" +
            format_fixed(delta.objective_after) + " loads=" + std::to_string(delta.loads.size()) +
            " evictions=" + std::to_string(delta.evictions.size()));

  for (const auto& [rid, node] : delta.evictions) drain(node, rid);
  for (const auto& load : delta.loads) {
    auto& rt = nodes_.at(load.node_id);
    auto it = std::find_if(rt.resident.begin(), rt.resident.end(), [&](const Residency& r) {
      return r.realization_id == load.realization_id;
    });
    if (it != rt.resident.end()) {
      it->draining = false;
      push_telemetry(load.node_id);
      continue;
    }
    const auto& r = catalog_.realization(load.realization_id);
    if (r.memory > rt.free_memory) {
      trace("load_deferred", "", load.node_id, load.realization_id);
      continue;
    }
    const auto& repo = router_->config().repository;
    if (!repo.empty()) core_.record(topology_.path(repo, load.node_id), r.artifact_size);
    activate(load.node_id, load.realization_id, load.ready_at, load.ready_at - now_);
  }
  if (now_ + ps.epoch < duration_) schedule(now_ + ps.epoch, EventKind::kEpochReplan);
}

void Simulator::on_revoke(const RealizationId& rid) {
  const auto fx = trust_.revoke(rid, *broker_, &cache_, now_);
  trace("revoke", "", "",
        rid + " evictions=" + std::to_string(fx.evictions.size()) +
            " invalidated=" + std::to_string(fx.invalidated_states.size()));
  for (const auto& [node, r] : fx.evictions) drain(node, r);
}

void Simulator::on_attestation(std::size_t index) {
  const auto& a = scenario_.attestations[index];
  trust_.attest(a);
  broker_->set_trust(a.node_id, a.trust);
  trace("attestation", "", a.node_id,
        "trust=" + std::to_string(a.trust) + " until=" + std::to_string(a.expires_at()));
  schedule(a.expires_at(), EventKind::kAttestationExpiry, 0, 0, a.node_id);
}

void Simulator::on_attestation_expiry(const NodeId& node) {
  if (!trust_.expired(node, now_)) return;  // renewed since
  broker_->set_trust(node, trust_.effective_trust(node, now_));
  trace("attestation_expiry", "", node, "");
}

void Simulator::cancel_unstarted(std::size_t i) {
  auto& fl = flights_[i];
  const auto& stages = fl.sel.plan.stages;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    if (fl.started[s]) continue;
    auto& rt = nodes_.at(stages[s].node_id);
    --rt.queue_length;
    --rt.in_flight[stages[s].realization_id];
    fl.started[s] = true;
    trace("cancel", requests_[i].request_id, stages[s].node_id, "stage=" + std::to_string(s));
    evict_if_idle(stages[s].node_id, stages[s].realization_id);
    push_telemetry(stages[s].node_id);
  }
}

void Simulator::finish_served(std::size_t i) {
  const auto& q = requests_[i];
  auto& fl = flights_[i];
  fl.done = true;
  const auto& plan = fl.sel.plan;
  const auto& predicted = fl.sel.cost.terms;

  ExecutionReceipt e;
  e.request_id = q.request_id;
  e.plan = plan.stages;
  std::set<RealizationId> seen;
  for (const auto& s : plan.stages) {
    if (seen.insert(s.realization_id).second) {
      e.capability_versions.push_back({s.realization_id, catalog_.lineage_digest(s.realization_id)});
    }
  }
  e.node_attestations = fl.attestations;
  e.cache_usage.state_ids = fl.state_ids;
  e.cache_usage.tokens_covered = fl.sel.cost.covered_tokens;
  e.verdict = fl.sel.degraded ? Verdict::kDegraded : Verdict::kAllowed;
  e.reason = fl.sel.degraded ? "QualityDowngrade" : "";

  auto& t = e.timing;
  t.t_net = fl.sel.cost.inbound + fl.sel.cost.kv_transfer + fl.sel.cost.response;
  for (const auto& span : fl.timeline.stages) {
    t.t_queue += span.start - span.ready;
    t.t_exec += span.timing.total();
  }
  t.t_state = predicted.t_state;
  t.c_load = predicted.c_load;
  t.p_policy = predicted.p_policy;
  t.total = weighted_total(t, router_->config().weights);
  e.predicted = predicted;
  e.arrival_time = q.arrival_time;
  e.completion_time = now_;
  const auto tt = compute_ttft_tpot(fl.timeline);
  e.ttft = tt.ttft;
  e.tpot = tt.tpot;
  e.served_quality = catalog_.variant_of(plan.stages.front().realization_id).quality;
  trace("receipt", q.request_id, plan.stages.back().node_id, std::string(to_string(e.verdict)));
  receipts_.append(std::move(e));

  RequestRecord rec;
  rec.request_id = q.request_id;
  rec.capability_class = q.capability_class;
  rec.region = q.origin_region;
  rec.outcome = Outcome::kServed;
  rec.admitted = true;
  rec.degraded = fl.sel.degraded;
  rec.arrival = q.arrival_time;
  rec.completion = now_;
  rec.latency = now_ - q.arrival_time;
  rec.ttft = tt.ttft;
  rec.tpot = tt.tpot;
  rec.prefix_eligible = fl.prefix_eligible;
  rec.prefix_hit = fl.prefix_hit;
  rec.covered_tokens = fl.sel.cost.covered_tokens;
  records_.push_back(std::move(rec));
}

void Simulator::finish_rejected(std::size_t i, const std::string& reason, bool admitted,
                                Outcome outcome) {
  const auto& q = requests_[i];
  auto& fl = flights_[i];
  fl.done = true;

  ExecutionReceipt e;
  e.request_id = q.request_id;
  e.node_attestations = fl.attestations;
  e.verdict = Verdict::kRejected;
  e.reason = reason;
  if (admitted) e.predicted = fl.sel.cost.terms;
  e.arrival_time = q.arrival_time;
  e.completion_time = now_;
  trace("receipt", q.request_id, "", "rejected " + reason);
  receipts_.append(std::move(e));

  RequestRecord rec;
  rec.request_id = q.request_id;
  rec.capability_class = q.capability_class;
  rec.region = q.origin_region;
  rec.outcome = outcome;
  rec.reason = reason;
  rec.admitted = admitted;
  rec.degraded = fl.sel.degraded;
  rec.arrival = q.arrival_time;
  rec.completion = now_;
  rec.prefix_eligible = prefix_eligible(q);
  records_.push_back(std::move(rec));
}

}  // namespace

RunResult run(const Scenario& scenario, const RunOptions& options) {
  Simulator sim(scenario, options);
  return sim.run();
}

OracleReport oracle_place(const Scenario& scenario, Micros at, const RunOptions& options) {
  if (at < 0) throw IdnError(ErrorCode::kScenarioInvalid, "oracle time must be >= 0");
  RunOptions o = options;
  o.duration = at + 1;  // arrivals up to and including `at`
  Simulator sim(scenario, o);
  return sim.oracle(at);
}

}  // namespace idn
