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

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "edgesim/cluster/config.hpp"
#include "edgesim/log/record.hpp"
#include "edgesim/sim/kernel.hpp"

namespace edgesim {

#define EDGESIM_MSG(NAME) \
  const char* type_name() const override { return #NAME; }

// ---- timers ----

struct ManagerTick : MessageBase {
  EDGESIM_MSG(ManagerTick)
};
struct ElectionTimeout : MessageBase {
  std::uint64_t arm_id = 0;  // stale timers carry an old arm id and are ignored
  EDGESIM_MSG(ElectionTimeout)
};
struct BrokerTick : MessageBase {
  EDGESIM_MSG(BrokerTick)
};
struct StageTick : MessageBase {
  EDGESIM_MSG(StageTick)
};
struct HeartbeatTick : MessageBase {
  EDGESIM_MSG(HeartbeatTick)
};

// ---- cluster manager: election and config replication ----

struct RequestVote : MessageBase {
  std::uint64_t term = 0;
  NodeId candidate;
  std::uint64_t last_slot = 0;  // log length
  std::uint64_t last_term = 0;
  EDGESIM_MSG(RequestVote)
};

struct VoteReply : MessageBase {
  std::uint64_t term = 0;
  bool granted = false;
  EDGESIM_MSG(VoteReply)
};

struct AppendEntriesReq : MessageBase {
  std::uint64_t term = 0;
  NodeId leader;
  std::uint64_t prev_slot = 0;  // number of entries preceding `entries`
  std::uint64_t prev_term = 0;
  std::vector<ConfigLogEntry> entries;
  std::uint64_t commit = 0;  // committed entry count
  EDGESIM_MSG(AppendEntriesReq)
};

struct AppendEntriesResp : MessageBase {
  std::uint64_t term = 0;
  bool ok = false;
  std::uint64_t match = 0;  // entries known replicated on the follower
  EDGESIM_MSG(AppendEntriesResp)
};

struct NodeHeartbeat : MessageBase {
  EDGESIM_MSG(NodeHeartbeat)
};

struct ProposeReq : MessageBase {
  ConfigCommand cmd;
  std::uint64_t req_id = 0;
  EDGESIM_MSG(ProposeReq)
};

enum class ProposeStatus : std::uint8_t { ok, not_leader, no_quorum, invalid };

struct ProposeResp : MessageBase {
  std::uint64_t req_id = 0;
  ProposeStatus status = ProposeStatus::ok;
  std::uint64_t epoch = 0;
  NodeId leader_hint;
  std::string error;
  EDGESIM_MSG(ProposeResp)
};

/// Full cluster view broadcast by the manager leader after commits and on a
/// periodic tick; nodes reconcile their local broker roles and stage set
/// against it (replication-controller style, level triggered).
struct ConfigPush : MessageBase {
  std::uint64_t epoch = 0;
  std::vector<TopicState> topics;
  std::vector<StageState> stages;
  EDGESIM_MSG(ConfigPush)
};

struct StatusQuery : MessageBase {
  TopicId topic;
  EDGESIM_MSG(StatusQuery)
};

struct StatusReport : MessageBase {
  TopicId topic;
  std::uint64_t durable_len = 0;
  std::uint64_t durable_commit = 0;
  std::map<std::string, std::uint64_t> offsets;
  EDGESIM_MSG(StatusReport)
};

/// Broker-to-manager notice that a follower has fully caught up.
struct IsrJoinReady : MessageBase {
  TopicId topic;
  NodeId node;
  EDGESIM_MSG(IsrJoinReady)
};

// ---- replicated log: client side ----

enum class RpcStatus : std::uint8_t { ok, redirect, no_leader, rejected };

struct ClientAppendReq : MessageBase {
  TopicId topic;
  std::string client;  // stage id, for traceability
  std::uint64_t req_id = 0;
  std::vector<Record> records;
  EDGESIM_MSG(ClientAppendReq)
};

struct ClientAppendResp : MessageBase {
  TopicId topic;
  std::uint64_t req_id = 0;
  RpcStatus status = RpcStatus::ok;
  std::uint64_t base_offset = 0;
  NodeId leader_hint;
  EDGESIM_MSG(ClientAppendResp)
};

struct FetchReq : MessageBase {
  TopicId topic;
  std::uint64_t req_id = 0;
  std::uint64_t from = 0;
  std::uint32_t max = 1;
  EDGESIM_MSG(FetchReq)
};

struct FetchResp : MessageBase {
  TopicId topic;
  std::uint64_t req_id = 0;
  RpcStatus status = RpcStatus::ok;
  std::uint64_t from = 0;
  std::vector<Record> records;
  std::uint64_t commit_count = 0;
  NodeId leader_hint;
  EDGESIM_MSG(FetchResp)
};

struct OffsetCommitReq : MessageBase {
  TopicId topic;
  std::string group;
  std::uint64_t req_id = 0;
  std::uint64_t offset = 0;
  EDGESIM_MSG(OffsetCommitReq)
};

struct OffsetCommitResp : MessageBase {
  TopicId topic;
  std::uint64_t req_id = 0;
  RpcStatus status = RpcStatus::ok;
  NodeId leader_hint;
  EDGESIM_MSG(OffsetCommitResp)
};

struct OffsetFetchReq : MessageBase {
  TopicId topic;
  std::string group;
  std::uint64_t req_id = 0;
  EDGESIM_MSG(OffsetFetchReq)
};

struct OffsetFetchResp : MessageBase {
  TopicId topic;
  std::uint64_t req_id = 0;
  RpcStatus status = RpcStatus::ok;
  std::uint64_t offset = 0;
  NodeId leader_hint;
  EDGESIM_MSG(OffsetFetchResp)
};

// ---- replicated log: leader <-> follower ----

struct ReplicateReq : MessageBase {
  TopicId topic;
  std::uint64_t leader_epoch = 0;
  std::uint64_t base_offset = 0;
  std::vector<Record> records;
  std::uint64_t commit_count = 0;
  EDGESIM_MSG(ReplicateReq)
};

struct ReplicateAck : MessageBase {
  TopicId topic;
  std::uint64_t leader_epoch = 0;
  std::uint64_t durable_len = 0;
  std::uint64_t durable_commit = 0;
  EDGESIM_MSG(ReplicateAck)
};

struct OffsetReplicate : MessageBase {
  TopicId topic;
  std::uint64_t leader_epoch = 0;
  std::string group;
  std::uint64_t offset = 0;
  EDGESIM_MSG(OffsetReplicate)
};

struct OffsetReplicateAck : MessageBase {
  TopicId topic;
  std::string group;
  std::uint64_t offset = 0;
  EDGESIM_MSG(OffsetReplicateAck)
};

// ---- workload ----

/// Broadcast to every node; only the node currently hosting the stage acts.
struct GenerateCmd : MessageBase {
  StageId stage;
  std::uint32_t count = 0;
  EDGESIM_MSG(GenerateCmd)
};

#undef EDGESIM_MSG

}  // namespace edgesim
