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

#include <deque>
#include <map>
#include <optional>
#include <set>

#include "edgesim/sim/messages.hpp"

namespace edgesim {

/// Per-topic replica hosted by this node. The log, committed count, consumer
/// offsets and leader epoch are durable; everything else is rebuilt from the
/// manager's config pushes after a restart.
struct ReplicaState {
  TopicState view;
  bool has_view = false;

  std::vector<Record> log;
  std::uint64_t commit_count = 0;
  std::map<std::string, std::uint64_t> offsets;
  std::uint64_t stored_leader_epoch = 0;

  // Leader-only volatile bookkeeping.
  bool leading = false;
  std::map<NodeId, std::uint64_t> follower_len;     // acked durable length
  std::map<NodeId, std::uint64_t> follower_commit;  // acked durable commit
  struct PendingAppend {
    NodeId client_node;
    std::string client;
    std::uint64_t req_id = 0;
    std::uint64_t base = 0;
    std::uint64_t end = 0;
  };
  std::deque<PendingAppend> pending_appends;
  struct PendingOffset {
    NodeId client_node;
    std::uint64_t req_id = 0;
    std::string group;
    std::uint64_t offset = 0;
    std::set<NodeId> acks;
  };
  std::vector<PendingOffset> pending_offsets;
};

/// Data transport half of a node: hosts topic replicas, sequences appends as
/// leader, replicates to followers, acknowledges after a majority of the
/// replica set holds both the record and the covering commit index durably.
class BrokerCore {
 public:
  void on_start(Runtime& rt);
  void apply_config(Runtime& rt, const ConfigPush& push);
  bool handle(Runtime& rt, const NodeId& from, const MessageBase& m);

  const ReplicaState* replica(const TopicId& t) const;
  std::optional<NodeId> leader_hint(const TopicId& t) const;

 private:
  void on_tick(Runtime& rt);
  ReplicaState& ensure_loaded(Runtime& rt, const TopicId& t);
  void adopt_epoch(Runtime& rt, ReplicaState& rs, const TopicId& t, std::uint64_t leader_epoch);
  void become_leader(Runtime& rt, ReplicaState& rs, const TopicId& t);
  void append_durable(Runtime& rt, ReplicaState& rs, const TopicId& t,
                      const std::vector<Record>& recs, const std::string& client);
  void persist_commit(Runtime& rt, ReplicaState& rs, const TopicId& t);
  void persist_offsets(Runtime& rt, ReplicaState& rs, const TopicId& t);
  void try_advance(Runtime& rt, ReplicaState& rs, const TopicId& t);
  void replicate_to(Runtime& rt, ReplicaState& rs, const TopicId& t, const NodeId& follower);

  void on_client_append(Runtime& rt, const NodeId& from, const ClientAppendReq& m);
  void on_fetch(Runtime& rt, const NodeId& from, const FetchReq& m);
  void on_offset_commit(Runtime& rt, const NodeId& from, const OffsetCommitReq& m);
  void on_offset_fetch(Runtime& rt, const NodeId& from, const OffsetFetchReq& m);
  void on_replicate(Runtime& rt, const NodeId& from, const ReplicateReq& m);
  void on_replicate_ack(Runtime& rt, const NodeId& from, const ReplicateAck& m);
  void on_offset_replicate(Runtime& rt, const NodeId& from, const OffsetReplicate& m);
  void on_offset_replicate_ack(Runtime& rt, const NodeId& from, const OffsetReplicateAck& m);
  void on_status_query(Runtime& rt, const NodeId& from, const StatusQuery& m);

  std::map<TopicId, ReplicaState> replicas_;
  std::map<TopicId, TopicState> cluster_topics_;  // routing directory
};

}  // namespace edgesim
