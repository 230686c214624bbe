// Copyright 2026 the edgesim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "edgesim/cluster/manager.hpp"

#include <algorithm>

#include "edgesim/sim/bytes.hpp"

namespace edgesim {

namespace {

constexpr const char* kKeyTerm = "mgr/term";
constexpr const char* kKeyVote = "mgr/vote";
constexpr const char* kKeyLog = "mgr/log";

Bytes enc_u64(std::uint64_t v) {
  Bytes b;
  ByteWriter w(b);
  w.u64(v);
  return b;
}

}  // namespace

void ManagerCore::on_start(Runtime& rt) {
  cluster_ = rt.self_info().cluster;
  for (const auto& n : rt.directory()) {
    if (n.cluster == cluster_) {
      cfg_.membership[n.id] = MemberState{n.role, NodeStatus::up};
      if (n.role == Role::master) masters_.push_back(n.id);
    }
  }
  std::sort(masters_.begin(), masters_.end());

  auto& disk = rt.disk();
  if (const Bytes* b = disk.get(kKeyTerm)) term_ = ByteReader(*b).u64();
  if (const Bytes* b = disk.get(kKeyVote)) {
    std::string v(b->begin(), b->end());
    if (!v.empty()) voted_for_ = v;
  }
  if (const Bytes* b = disk.get(kKeyLog)) log_ = decode_config_log(*b);

  arm_election_timer(rt);
  rt.schedule_self(rt.params().heartbeat_interval, make_msg<ManagerTick>());
}

// ---- election ----

void ManagerCore::arm_election_timer(Runtime& rt) {
  election_arm_++;
  SimTime d = rt.rand_range(rt.params().election_timeout_min, rt.params().election_timeout_max);
  auto msg = std::make_shared<ElectionTimeout>();
  msg->arm_id = election_arm_;
  rt.schedule_self(d, msg);
}

void ManagerCore::persist_term_vote(Runtime& rt) {
  rt.disk().put(kKeyTerm, enc_u64(term_));
  std::string v = voted_for_.value_or("");
  rt.disk().put(kKeyVote, Bytes(v.begin(), v.end()));
}

void ManagerCore::persist_log(Runtime& rt) { rt.disk().put(kKeyLog, encode_config_log(log_)); }

void ManagerCore::start_election(Runtime& rt) {
  term_ += 1;
  voted_for_ = rt.self();
  persist_term_vote(rt);
  role_ = MgrRole::candidate;
  leader_known_.reset();
  votes_.clear();
  votes_.insert(rt.self());
  if (votes_.size() >= quorum(masters_.size())) {
    become_leader(rt);
    return;
  }
  auto msg = std::make_shared<RequestVote>();
  msg->term = term_;
  msg->candidate = rt.self();
  msg->last_slot = log_.size();
  msg->last_term = log_.empty() ? 0 : log_.back().term;
  for (const auto& m : masters_) {
    if (m != rt.self()) rt.send(m, msg);
  }
  arm_election_timer(rt);
}

void ManagerCore::become_leader(Runtime& rt) {
  role_ = MgrRole::leader;
  leader_known_ = rt.self();
  next_.clear();
  match_.clear();
  follower_contact_.clear();
  for (const auto& m : masters_) {
    if (m == rt.self()) continue;
    next_[m] = log_.size();
    match_[m] = 0;
    follower_contact_[m] = rt.now();
  }
  last_seen_.clear();
  for (const auto& [n, ms] : cfg_.membership) last_seen_[n] = rt.now();
  pending_cmds_.clear();
  surveys_.clear();
  rt.trace("leader_elected", {{"cluster", to_string(cluster_)},
                              {"term", std::to_string(term_)},
                              {"leader", rt.self()}});
  // Committing a current-term entry proves an operational leader and pulls
  // any earlier uncommitted entries along with it.
  propose_local(rt, NoopCmd{}, /*dedup=*/false);
  broadcast_append(rt);
}

void ManagerCore::step_down(Runtime& rt, std::uint64_t new_term) {
  if (new_term > term_) {
    term_ = new_term;
    voted_for_.reset();
    persist_term_vote(rt);
  }
  if (role_ != MgrRole::follower) {
    role_ = MgrRole::follower;
    surveys_.clear();
    proposers_.clear();
    pending_cmds_.clear();
  }
  arm_election_timer(rt);
}

void ManagerCore::on_request_vote(Runtime& rt, const NodeId& from, const RequestVote& m) {
  if (m.term > term_) step_down(rt, m.term);
  auto reply = std::make_shared<VoteReply>();
  reply->term = term_;
  if (m.term < term_) {
    rt.send(from, reply);
    return;
  }
  std::uint64_t my_last_term = log_.empty() ? 0 : log_.back().term;
  bool log_ok = m.last_term > my_last_term ||
                (m.last_term == my_last_term && m.last_slot >= log_.size());
  bool grant = false;
  if (log_ok) {
    if (!voted_for_ || *voted_for_ == m.candidate) {
      grant = true;
    } else if (role_ == MgrRole::candidate && m.candidate < rt.self()) {
      // Same-term simultaneous candidacy: the lower node id proceeds. Our
      // self-vote was never counted by anyone else, so regranting is safe.
      role_ = MgrRole::follower;
      grant = true;
    }
  }
  if (grant) {
    voted_for_ = m.candidate;
    persist_term_vote(rt);
    reply->granted = true;
    arm_election_timer(rt);
  }
  rt.send(from, reply);
}

void ManagerCore::on_vote_reply(Runtime& rt, const NodeId& from, const VoteReply& m) {
  if (m.term > term_) {
    step_down(rt, m.term);
    return;
  }
  if (role_ != MgrRole::candidate || m.term != term_ || !m.granted) return;
  votes_.insert(from);
  if (votes_.size() >= quorum(masters_.size())) become_leader(rt);
}

// ---- log replication ----

void ManagerCore::send_append_to(Runtime& rt, const NodeId& follower) {
  auto msg = std::make_shared<AppendEntriesReq>();
  msg->term = term_;
  msg->leader = rt.self();
  std::uint64_t from = next_[follower];
  msg->prev_slot = from;
  msg->prev_term = from == 0 ? 0 : log_[from - 1].term;
  msg->entries.assign(log_.begin() + static_cast<std::ptrdiff_t>(from), log_.end());
  msg->commit = commit_;
  rt.send(follower, msg);
}

void ManagerCore::broadcast_append(Runtime& rt) {
  for (const auto& m : masters_) {
    if (m != rt.self()) send_append_to(rt, m);
  }
}

void ManagerCore::on_append_entries(Runtime& rt, const NodeId& from, const AppendEntriesReq& m) {
  auto resp = std::make_shared<AppendEntriesResp>();
  if (m.term < term_) {
    resp->term = term_;
    resp->ok = false;
    rt.send(from, resp);
    return;
  }
  if (m.term > term_ || role_ != MgrRole::follower) step_down(rt, m.term);
  leader_known_ = m.leader;
  arm_election_timer(rt);
  resp->term = term_;

  if (m.prev_slot > log_.size()) {
    resp->ok = false;
    resp->match = log_.size();
    rt.send(from, resp);
    return;
  }
  if (m.prev_slot > 0 && log_[m.prev_slot - 1].term != m.prev_term) {
    log_.resize(m.prev_slot - 1);
    persist_log(rt);
    resp->ok = false;
    resp->match = log_.size();
    rt.send(from, resp);
    return;
  }
  bool dirty = false;
  for (const auto& e : m.entries) {
    if (e.slot < log_.size()) {
      if (log_[e.slot].term != e.term) {
        log_.resize(e.slot);
        log_.push_back(e);
        dirty = true;
      }
    } else {
      log_.push_back(e);
      dirty = true;
    }
  }
  if (dirty) persist_log(rt);
  std::uint64_t newc = std::min<std::uint64_t>(m.commit, log_.size());
  if (newc > commit_) {
    commit_ = newc;
    apply_committed(rt);
  }
  resp->ok = true;
  resp->match = m.prev_slot + m.entries.size();
  rt.send(from, resp);
}

void ManagerCore::on_append_resp(Runtime& rt, const NodeId& from, const AppendEntriesResp& m) {
  if (m.term > term_) {
    step_down(rt, m.term);
    return;
  }
  if (role_ != MgrRole::leader || m.term != term_) return;
  follower_contact_[from] = rt.now();
  if (m.ok) {
    match_[from] = std::max(match_[from], m.match);
    next_[from] = std::max(next_[from], m.match);
    advance_commit(rt);
  } else {
    next_[from] = std::min(next_[from], m.match);
    send_append_to(rt, from);
  }
}

void ManagerCore::advance_commit(Runtime& rt) {
  std::uint64_t q = quorum(masters_.size());
  for (std::uint64_t c = log_.size(); c > commit_; --c) {
    if (log_[c - 1].term != term_) break;  // only current-term entries commit by counting
    std::uint64_t have = 1;  // self
    for (const auto& [n, mt] : match_) {
      if (mt >= c) have++;
    }
    if (have >= q) {
      commit_ = c;
      apply_committed(rt);
      broadcast_append(rt);  // propagate the new commit index
      break;
    }
  }
}

void ManagerCore::apply_committed(Runtime& rt) {
  while (applied_ < commit_) {
    const ConfigLogEntry& e = log_[applied_];
    cfg_.apply(e.cmd);
    applied_++;
    Bytes enc = encode_command(e.cmd);
    pending_cmds_.erase(enc);
    rt.trace("config_apply", {{"epoch", std::to_string(cfg_.epoch)},
                              {"cmd", command_kind(e.cmd)},
                              {"digest", hex64(fnv1a(enc))}});
    if (role_ == MgrRole::leader) {
      Detail d = ClusterConfig::describe(e.cmd);
      d.insert(d.begin(), {"epoch", std::to_string(cfg_.epoch)});
      d.emplace_back("cluster", to_string(cluster_));
      rt.trace("config_commit", std::move(d));
      if (const auto* ns = std::get_if<NodeStatusCmd>(&e.cmd)) {
        rt.trace("node_status", {{"target", ns->node}, {"status", to_string(ns->status)}});
      } else if (const auto* ps = std::get_if<PlaceStageCmd>(&e.cmd)) {
        rt.trace("stage_place", {{"stage", ps->stage},
                                 {"host", ps->host.empty() ? "pending" : ps->host},
                                 {"epoch", std::to_string(cfg_.epoch)}});
      } else if (const auto* ij = std::get_if<IsrJoinCmd>(&e.cmd)) {
        rt.trace("isr_join", {{"topic", ij->topic}, {"target", ij->node}});
      } else if (const auto* ir = std::get_if<IsrRemoveCmd>(&e.cmd)) {
        rt.trace("isr_remove", {{"topic", ir->topic}, {"target", ir->node}});
      }
      auto pr = proposers_.find(e.slot);
      if (pr != proposers_.end()) {
        auto resp = std::make_shared<ProposeResp>();
        resp->req_id = pr->second.second;
        resp->status = ProposeStatus::ok;
        resp->epoch = cfg_.epoch;
        rt.send(pr->second.first, resp);
        proposers_.erase(pr);
      }
    }
  }
}

// ---- proposals ----

std::optional<std::string> ManagerCore::validate(const ConfigCommand& cmd) const {
  if (const auto* c = std::get_if<CreateTopicCmd>(&cmd)) {
    if (cfg_.topics.count(c->topic)) return "duplicate topic " + c->topic;
    if (c->replicas.size() != c->replication_factor)
      return "placement size below replication factor";
    std::set<NodeId> seen;
    for (const auto& n : c->replicas) {
      if (!seen.insert(n).second) return "duplicate replica " + n;
      auto it = cfg_.membership.find(n);
      if (it == cfg_.membership.end()) return "replica outside cluster: " + n;
      if (it->second.status != NodeStatus::up) return "replica not up: " + n;
    }
  } else if (const auto* c = std::get_if<CreateStageCmd>(&cmd)) {
    if (cfg_.stages.count(c->spec.id)) return "duplicate stage " + c->spec.id;
  } else if (const auto* c = std::get_if<PlaceStageCmd>(&cmd)) {
    auto it = cfg_.stages.find(c->stage);
    if (it == cfg_.stages.end() || it->second.moved_out) return "unknown stage " + c->stage;
    if (!c->host.empty() && !cfg_.membership.count(c->host))
      return "host outside cluster: " + c->host;
  } else if (const auto* c = std::get_if<ReplicaAddCmd>(&cmd)) {
    auto it = cfg_.topics.find(c->topic);
    if (it == cfg_.topics.end()) return "unknown topic " + c->topic;
    const auto& rs = it->second.replicas;
    if (std::find(rs.begin(), rs.end(), c->node) != rs.end())
      return "node already holds a replica of " + c->topic;
    auto mit = cfg_.membership.find(c->node);
    if (mit == cfg_.membership.end()) return "node outside cluster: " + c->node;
    if (mit->second.status == NodeStatus::failed) return "node failed: " + c->node;
  }
  return std::nullopt;
}

bool ManagerCore::propose_local(Runtime& rt, const ConfigCommand& cmd, bool dedup) {
  Bytes enc = encode_command(cmd);
  if (dedup) {
    if (pending_cmds_.count(enc)) return false;
    pending_cmds_.insert(enc);
  }
  log_.push_back(ConfigLogEntry{log_.size(), term_, cmd});
  persist_log(rt);
  advance_commit(rt);  // single-master clusters commit immediately
  broadcast_append(rt);
  return true;
}

bool ManagerCore::quorum_contact(Runtime& rt) const {
  std::uint64_t fresh = 1;  // self
  for (const auto& [n, t] : follower_contact_) {
    if (rt.now() - t <= rt.params().suspect_timeout) fresh++;
  }
  return fresh >= quorum(masters_.size());
}

void ManagerCore::on_propose(Runtime& rt, const NodeId& from, const ProposeReq& m) {
  auto resp = std::make_shared<ProposeResp>();
  resp->req_id = m.req_id;
  if (role_ != MgrRole::leader) {
    resp->status = ProposeStatus::not_leader;
    if (leader_known_) resp->leader_hint = *leader_known_;
    rt.send(from, resp);
    return;
  }
  if (!quorum_contact(rt)) {
    resp->status = ProposeStatus::no_quorum;
    rt.send(from, resp);
    return;
  }
  if (auto err = validate(m.cmd)) {
    resp->status = ProposeStatus::invalid;
    resp->error = *err;
    rt.send(from, resp);
    return;
  }
  std::uint64_t slot = log_.size();
  proposers_[slot] = {from, m.req_id};
  propose_local(rt, m.cmd, /*dedup=*/false);
}

// ---- failure detection, reconciliation, placement ----

void ManagerCore::on_tick(Runtime& rt) {
  if (role_ == MgrRole::leader) {
    detect_failures(rt);
    reconcile(rt);
    push_config(rt);
    broadcast_append(rt);  // doubles as the leader heartbeat
  }
  rt.schedule_self(rt.params().heartbeat_interval, make_msg<ManagerTick>());
}

void ManagerCore::detect_failures(Runtime& rt) {
  last_seen_[rt.self()] = rt.now();
  std::vector<ConfigCommand> cmds;
  for (const auto& [n, ms] : cfg_.membership) {
    SimTime seen = last_seen_.count(n) ? last_seen_[n] : 0;
    SimTime silent = rt.now() - seen;
    if (ms.status != NodeStatus::failed && silent > rt.params().fail_timeout) {
      cmds.push_back(NodeStatusCmd{n, NodeStatus::failed});
    } else if (ms.status == NodeStatus::up && silent > rt.params().suspect_timeout) {
      cmds.push_back(NodeStatusCmd{n, NodeStatus::suspected});
    }
  }
  for (const auto& cmd : cmds) propose_local(rt, cmd);
}

std::vector<NodeId> ManagerCore::pick_replicas(std::uint32_t rf,
                                               const TentativeLoad& extra) const {
  std::map<NodeId, std::uint64_t> replica_load = extra.replicas;
  std::map<NodeId, std::uint64_t> leader_load = extra.leaders;
  for (const auto& [t, ts] : cfg_.topics) {
    for (const auto& n : ts.replicas) replica_load[n]++;
    if (ts.leader) leader_load[*ts.leader]++;
  }
  std::vector<NodeId> ups;
  for (const auto& [n, ms] : cfg_.membership) {
    if (ms.status == NodeStatus::up) ups.push_back(n);
  }
  auto worker_first = [&](const NodeId& n) {
    return cfg_.membership.at(n).role == Role::worker ? 0 : 1;
  };
  if (ups.size() < rf) return {};
  // Leader slot spreads leaderships; followers spread replica count.
  std::vector<NodeId> result;
  std::sort(ups.begin(), ups.end(), [&](const NodeId& a, const NodeId& b) {
    auto ka = std::tuple(worker_first(a), leader_load[a], replica_load[a], a);
    auto kb = std::tuple(worker_first(b), leader_load[b], replica_load[b], b);
    return ka < kb;
  });
  result.push_back(ups.front());
  ups.erase(ups.begin());
  std::sort(ups.begin(), ups.end(), [&](const NodeId& a, const NodeId& b) {
    auto ka = std::tuple(worker_first(a), replica_load[a], a);
    auto kb = std::tuple(worker_first(b), replica_load[b], b);
    return ka < kb;
  });
  for (const auto& n : ups) {
    if (result.size() >= rf) break;
    result.push_back(n);
  }
  return result;
}

std::optional<NodeId> ManagerCore::pick_replacement(const TopicState& ts,
                                                    const TentativeLoad& extra) const {
  std::map<NodeId, std::uint64_t> replica_load = extra.replicas;
  for (const auto& [t, t2] : cfg_.topics) {
    for (const auto& n : t2.replicas) replica_load[n]++;
  }
  std::optional<NodeId> best;
  auto better = [&](const NodeId& a, const NodeId& b) {
    auto ka = std::tuple(cfg_.membership.at(a).role == Role::worker ? 0 : 1, replica_load[a], a);
    auto kb = std::tuple(cfg_.membership.at(b).role == Role::worker ? 0 : 1, replica_load[b], b);
    return ka < kb;
  };
  for (const auto& [n, ms] : cfg_.membership) {
    if (ms.status != NodeStatus::up) continue;
    if (std::find(ts.replicas.begin(), ts.replicas.end(), n) != ts.replicas.end()) continue;
    if (!best || better(n, *best)) best = n;
  }
  return best;
}

std::optional<NodeId> ManagerCore::pick_stage_host(const StageId& stage,
                                                   const TentativeLoad& extra) const {
  std::map<NodeId, std::uint64_t> stage_load = extra.stages;
  for (const auto& [s, ss] : cfg_.stages) {
    if (ss.host && !ss.moved_out && s != stage) stage_load[*ss.host]++;
  }
  std::optional<NodeId> best;
  auto better = [&](const NodeId& a, const NodeId& b) {
    auto ka = std::tuple(cfg_.membership.at(a).role == Role::worker ? 0 : 1, stage_load[a], a);
    auto kb = std::tuple(cfg_.membership.at(b).role == Role::worker ? 0 : 1, stage_load[b], b);
    return ka < kb;
  };
  for (const auto& [n, ms] : cfg_.membership) {
    if (ms.status != NodeStatus::up) continue;
    if (!best || better(n, *best)) best = n;
  }
  return best;
}

void ManagerCore::reconcile(Runtime& rt) {
  if (!quorum_contact(rt)) return;
  auto status_of = [&](const NodeId& n) {
    auto it = cfg_.membership.find(n);
    return it == cfg_.membership.end() ? NodeStatus::failed : it->second.status;
  };
  // Proposals commit (and apply) synchronously on single-master clusters, so
  // gather them while scanning and propose only after the scan. The tentative
  // load keeps placements chosen in the same pass from piling onto one node.
  std::vector<ConfigCommand> cmds;
  TentativeLoad tentative;

  for (const auto& d : desired_.topics) {
    if (cfg_.topics.count(d.topic)) continue;
    std::vector<NodeId> placement =
        d.replicas.empty() ? pick_replicas(d.replication_factor, tentative) : d.replicas;
    if (placement.size() == d.replication_factor) {
      tentative.leaders[placement.front()]++;
      for (const auto& n : placement) tentative.replicas[n]++;
      cmds.push_back(CreateTopicCmd{d.topic, d.replication_factor, placement});
    }
  }
  for (const auto& s : desired_.stages) {
    if (!cfg_.stages.count(s.id)) cmds.push_back(CreateStageCmd{s});
  }

  for (const auto& [t, ts] : cfg_.topics) {
    for (const auto& n : ts.isr) {
      if (status_of(n) == NodeStatus::failed) cmds.push_back(IsrRemoveCmd{t, n});
    }
    // A leader that recovered via restart must rejoin its in-sync set.
    if (ts.leader && status_of(*ts.leader) != NodeStatus::failed && !ts.isr.count(*ts.leader)) {
      cmds.push_back(IsrJoinCmd{t, *ts.leader});
    }
    bool need_promotion = !ts.leader || status_of(*ts.leader) == NodeStatus::failed;
    if (need_promotion) {
      std::set<NodeId> live_isr;
      for (const auto& n : ts.isr) {
        if (status_of(n) != NodeStatus::failed) live_isr.insert(n);
      }
      std::set<NodeId> live_replicas;
      for (const auto& n : ts.replicas) {
        if (status_of(n) != NodeStatus::failed) live_replicas.insert(n);
      }
      std::set<NodeId> candidates;
      if (live_isr.size() >= quorum(ts.replicas.size())) {
        candidates = live_isr;
      } else if (live_replicas.size() == ts.replicas.size() && !ts.replicas.empty()) {
        // Everyone restarted: the longest durable log among all replicas
        // covers every acked record (each was majority-durable).
        candidates = live_replicas;
      }
      if (!candidates.empty()) {
        auto it = surveys_.find(t);
        bool restart = it == surveys_.end() || it->second.expected != candidates ||
                       rt.now() - it->second.started > rt.params().rpc_timeout;
        if (restart) {
          Survey s;
          s.expected = candidates;
          s.started = rt.now();
          surveys_[t] = std::move(s);
          for (const auto& n : candidates) {
            auto q = std::make_shared<StatusQuery>();
            q->topic = t;
            rt.send(n, q);
          }
        }
      } else if (!warned_unavailable_.count(t)) {
        warned_unavailable_.insert(t);
        rt.trace("topic_unavailable", {{"topic", t},
                                       {"live_isr", std::to_string(live_isr.size())}});
      }
    } else {
      surveys_.erase(t);
      warned_unavailable_.erase(t);
      // Restore the replica set after failures, when enabled and led.
      if (rt.params().re_replication) {
        for (const auto& n : ts.replicas) {
          if (status_of(n) == NodeStatus::failed && pick_replacement(ts, tentative)) {
            cmds.push_back(ReplicaRemoveCmd{t, n});
          }
        }
        if (ts.replicas.size() < ts.replication_factor) {
          if (auto repl = pick_replacement(ts, tentative)) {
            tentative.replicas[*repl]++;
            cmds.push_back(ReplicaAddCmd{t, *repl});
          } else if (!warned_short_.count(t)) {
            warned_short_.insert(t);
            rt.trace("replica_short", {{"topic", t},
                                       {"have", std::to_string(ts.replicas.size())},
                                       {"want", std::to_string(ts.replication_factor)}});
          }
        }
      }
    }
  }

  for (const auto& [sid, ss] : cfg_.stages) {
    if (ss.moved_out) continue;
    bool needs_host = !ss.host || status_of(*ss.host) == NodeStatus::failed;
    if (!needs_host) continue;
    auto host = pick_stage_host(sid, tentative);
    if (host) {
      tentative.stages[*host]++;
      cmds.push_back(PlaceStageCmd{sid, *host});
    } else if (ss.host) {
      cmds.push_back(PlaceStageCmd{sid, ""});  // explicitly pending
    }
  }

  for (const auto& cmd : cmds) {
    if (!validate(cmd)) propose_local(rt, cmd);
  }
}

void ManagerCore::push_config(Runtime& rt) {
  auto push = std::make_shared<ConfigPush>();
  push->epoch = cfg_.epoch;
  for (const auto& [t, ts] : cfg_.topics) push->topics.push_back(ts);
  for (const auto& [s, ss] : cfg_.stages) {
    if (!ss.moved_out) push->stages.push_back(ss);
  }
  for (const auto& [n, ms] : cfg_.membership) {
    if (ms.status != NodeStatus::failed && n != rt.self()) rt.send(n, push);
  }
  // Local delivery without a network hop keeps single-node clusters exact.
  rt.send(rt.self(), push);
}

void ManagerCore::on_status_report(Runtime& rt, const NodeId& from, const StatusReport& m) {
  if (role_ != MgrRole::leader) return;
  auto it = surveys_.find(m.topic);
  if (it == surveys_.end() || !it->second.expected.count(from)) return;
  it->second.replies[from] = m;
  if (it->second.replies.size() < it->second.expected.size()) return;
  // All live in-sync replicas reported: promote the longest durable log,
  // ties to the lowest node id. The merged commit floor and offsets ride
  // along in the command so every master applies the same result.
  const auto& replies = it->second.replies;
  NodeId winner;
  std::uint64_t best_len = 0;
  for (const auto& [n, rep] : replies) {
    if (winner.empty() || rep.durable_len > best_len ||
        (rep.durable_len == best_len && n < winner)) {
      winner = n;
      best_len = rep.durable_len;
    }
  }
  TopicLeaderCmd cmd;
  cmd.topic = m.topic;
  cmd.leader = winner;
  for (const auto& [n, rep] : replies) {
    cmd.isr.push_back(n);
    cmd.baseline_commit = std::max(cmd.baseline_commit, rep.durable_commit);
    for (const auto& [g, o] : rep.offsets) {
      auto& cur = cmd.merged_offsets[g];
      cur = std::max(cur, o);
    }
  }
  surveys_.erase(it);
  propose_local(rt, ConfigCommand{cmd});
}

void ManagerCore::on_isr_join_ready(Runtime& rt, const NodeId& from, const IsrJoinReady& m) {
  if (role_ != MgrRole::leader) return;
  auto it = cfg_.topics.find(m.topic);
  if (it == cfg_.topics.end()) return;
  const auto& ts = it->second;
  if (ts.isr.count(m.node)) return;
  if (std::find(ts.replicas.begin(), ts.replicas.end(), m.node) == ts.replicas.end()) return;
  auto ms = cfg_.membership.find(m.node);
  if (ms == cfg_.membership.end() || ms->second.status == NodeStatus::failed) return;
  propose_local(rt, IsrJoinCmd{m.topic, m.node});
}

bool ManagerCore::handle(Runtime& rt, const NodeId& from, const MessageBase& m) {
  if (auto* p = dynamic_cast<const ElectionTimeout*>(&m)) {
    if (p->arm_id == election_arm_ && role_ != MgrRole::leader) start_election(rt);
    return true;
  }
  if (dynamic_cast<const ManagerTick*>(&m)) {
    on_tick(rt);
    return true;
  }
  if (auto* p = dynamic_cast<const RequestVote*>(&m)) {
    on_request_vote(rt, from, *p);
    return true;
  }
  if (auto* p = dynamic_cast<const VoteReply*>(&m)) {
    on_vote_reply(rt, from, *p);
    return true;
  }
  if (auto* p = dynamic_cast<const AppendEntriesReq*>(&m)) {
    on_append_entries(rt, from, *p);
    return true;
  }
  if (auto* p = dynamic_cast<const AppendEntriesResp*>(&m)) {
    on_append_resp(rt, from, *p);
    return true;
  }
  if (dynamic_cast<const NodeHeartbeat*>(&m)) {
    if (role_ == MgrRole::leader && cfg_.membership.count(from)) {
      last_seen_[from] = rt.now();
      if (cfg_.membership[from].status != NodeStatus::up && quorum_contact(rt)) {
        propose_local(rt, NodeStatusCmd{from, NodeStatus::up});
      }
    }
    return true;
  }
  if (auto* p = dynamic_cast<const ProposeReq*>(&m)) {
    on_propose(rt, from, *p);
    return true;
  }
  if (auto* p = dynamic_cast<const StatusReport*>(&m)) {
    on_status_report(rt, from, *p);
    return true;
  }
  if (auto* p = dynamic_cast<const IsrJoinReady*>(&m)) {
    on_isr_join_ready(rt, from, *p);
    return true;
  }
  return false;
}

}  // namespace edgesim
