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

#pragma once

#include <optional>
#include <set>

#include "edgesim/log/broker.hpp"
#include "edgesim/sim/messages.hpp"

namespace edgesim {

/// Bootstrap objects a cluster's manager creates once it has a leader.
struct DesiredTopic {
  TopicId topic;
  std::uint32_t replication_factor = 1;
  std::vector<NodeId> replicas;  // optional explicit placement, first = leader
};

struct ManagerDesired {
  std::vector<DesiredTopic> topics;
  std::vector<StageSpec> stages;
};

/// Multi-cluster management layer, one instance per master node. A minimal
/// term-based majority-replicated command log (no compaction, fixed master
/// set) drives: leader election, the quorum config store, heartbeat failure
/// detection, stage scheduling, replica placement and promotion, and
/// level-triggered reconciliation of placements against live nodes.
class ManagerCore {
 public:
  explicit ManagerCore(ManagerDesired desired) : desired_(std::move(desired)) {}

  void on_start(Runtime& rt);
  bool handle(Runtime& rt, const NodeId& from, const MessageBase& m);

  enum class MgrRole : std::uint8_t { follower, candidate, leader };
  MgrRole role() const { return role_; }
  std::uint64_t term() const { return term_; }
  std::uint64_t applied_epoch() const { return cfg_.epoch; }
  const ClusterConfig& config() const { return cfg_; }

 private:
  // election
  void arm_election_timer(Runtime& rt);
  void start_election(Runtime& rt);
  void become_leader(Runtime& rt);
  void step_down(Runtime& rt, std::uint64_t new_term);
  void on_request_vote(Runtime& rt, const NodeId& from, const RequestVote& m);
  void on_vote_reply(Runtime& rt, const NodeId& from, const VoteReply& m);

  // log replication
  void persist_term_vote(Runtime& rt);
  void persist_log(Runtime& rt);
  void send_append_to(Runtime& rt, const NodeId& follower);
  void broadcast_append(Runtime& rt);
  void on_append_entries(Runtime& rt, const NodeId& from, const AppendEntriesReq& m);
  void on_append_resp(Runtime& rt, const NodeId& from, const AppendEntriesResp& m);
  void advance_commit(Runtime& rt);
  void apply_committed(Runtime& rt);

  // proposals
  std::optional<std::string> validate(const ConfigCommand& cmd) const;
  bool propose_local(Runtime& rt, const ConfigCommand& cmd, bool dedup = true);
  void on_propose(Runtime& rt, const NodeId& from, const ProposeReq& m);
  bool quorum_contact(Runtime& rt) const;

  // failure detection + reconciliation
  void on_tick(Runtime& rt);
  void detect_failures(Runtime& rt);
  void reconcile(Runtime& rt);
  void push_config(Runtime& rt);
  void on_status_report(Runtime& rt, const NodeId& from, const StatusReport& m);
  void on_isr_join_ready(Runtime& rt, const NodeId& from, const IsrJoinReady& m);

  // Placement policy: up workers first, then masters; ties by load then id.
  // `extra` carries load tentatively assigned earlier in the same pass.
  struct TentativeLoad {
    std::map<NodeId, std::uint64_t> replicas;
    std::map<NodeId, std::uint64_t> leaders;
    std::map<NodeId, std::uint64_t> stages;
  };
  std::vector<NodeId> pick_replicas(std::uint32_t rf, const TentativeLoad& extra) const;
  std::optional<NodeId> pick_replacement(const TopicState& ts, const TentativeLoad& extra) const;
  std::optional<NodeId> pick_stage_host(const StageId& stage, const TentativeLoad& extra) const;

  ManagerDesired desired_;
  std::vector<NodeId> masters_;
  Cluster cluster_ = Cluster::edge;

  // durable mirrors
  std::uint64_t term_ = 0;
  std::optional<NodeId> voted_for_;
  std::vector<ConfigLogEntry> log_;

  // volatile
  MgrRole role_ = MgrRole::follower;
  std::optional<NodeId> leader_known_;
  std::uint64_t commit_ = 0;
  std::uint64_t applied_ = 0;
  ClusterConfig cfg_;
  std::set<NodeId> votes_;
  std::uint64_t election_arm_ = 0;
  std::map<NodeId, std::uint64_t> next_;
  std::map<NodeId, std::uint64_t> match_;
  std::map<NodeId, SimTime> follower_contact_;
  std::map<NodeId, SimTime> last_seen_;
  std::set<Bytes> pending_cmds_;
  std::map<std::uint64_t, std::pair<NodeId, std::uint64_t>> proposers_;  // slot -> (node, req)
  struct Survey {
    std::set<NodeId> expected;
    std::map<NodeId, StatusReport> replies;
    SimTime started = 0;
  };
  std::map<TopicId, Survey> surveys_;
  std::set<TopicId> warned_unavailable_;
  std::set<TopicId> warned_short_;
};

}  // namespace edgesim
