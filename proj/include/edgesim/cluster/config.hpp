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
#include <string>
#include <variant>
#include <vector>

#include "edgesim/sim/trace.hpp"
#include "edgesim/sim/types.hpp"

namespace edgesim {

enum class StageKind : std::uint8_t { source, transform, bridge, sink };
enum class Affinity : std::uint8_t { edge, cloud, any };

const char* to_string(StageKind k);
const char* to_string(Affinity a);

/// A processing container's wiring. `generation` counts wiring changes; the
/// consumer group name is derived from (stage_id, generation) so a rewired
/// stage restarts from its configured start offset instead of fighting the
/// monotonic-commit rule of its old group.
struct StageSpec {
  StageId id;
  StageKind kind = StageKind::transform;
  std::optional<TopicId> input;
  std::optional<TopicId> output;
  Affinity affinity = Affinity::any;
  std::string transform_id = "identity";
  std::uint64_t generation = 0;
  std::uint64_t input_start_offset = 0;

  std::string group() const;
  bool operator==(const StageSpec&) const = default;
};

// ---- Config commands (one committed command = one epoch) ----

struct NoopCmd {};  // appended by a newly elected leader to assert its term
struct NodeStatusCmd {
  NodeId node;
  NodeStatus status = NodeStatus::up;
};
struct CreateTopicCmd {
  TopicId topic;
  std::uint32_t replication_factor = 1;
  std::vector<NodeId> replicas;  // first entry is the initial leader
};
struct CreateStageCmd {
  StageSpec spec;
};
struct PlaceStageCmd {
  StageId stage;
  NodeId host;  // empty = pending
};
struct TopicLeaderCmd {  // promotion, directed by the manager's global view
  TopicId topic;
  NodeId leader;
  std::vector<NodeId> isr;
  std::uint64_t baseline_commit = 0;
  std::map<std::string, std::uint64_t> merged_offsets;
};
struct IsrRemoveCmd {
  TopicId topic;
  NodeId node;
};
struct IsrJoinCmd {
  TopicId topic;
  NodeId node;
};
struct ReplicaAddCmd {
  TopicId topic;
  NodeId node;
};
struct ReplicaRemoveCmd {
  TopicId topic;
  NodeId node;
};
struct MoveStageInCmd {  // create-or-rewire a stage in this cluster
  StageSpec spec;
};
struct MoveStageOutCmd {  // tombstone: the stage now lives in the other cluster
  StageId stage;
};

using ConfigCommand =
    std::variant<NoopCmd, NodeStatusCmd, CreateTopicCmd, CreateStageCmd, PlaceStageCmd,
                 TopicLeaderCmd, IsrRemoveCmd, IsrJoinCmd, ReplicaAddCmd, ReplicaRemoveCmd,
                 MoveStageInCmd, MoveStageOutCmd>;

const char* command_kind(const ConfigCommand& c);
Bytes encode_command(const ConfigCommand& c);
ConfigCommand decode_command(std::uint8_t kind, const Bytes& payload);

/// One slot of the replicated config log.
struct ConfigLogEntry {
  std::uint64_t slot = 0;  // 0-based; committing slot k yields epoch k+1
  std::uint64_t term = 0;
  ConfigCommand cmd;
};

// Durable config-command log framing, one entry per committed-or-pending slot:
//   epoch(8) | term(8) | cmd_kind(1) | cmd_payload(length-prefixed, 4 bytes)
Bytes encode_config_log(const std::vector<ConfigLogEntry>& log);
std::vector<ConfigLogEntry> decode_config_log(const Bytes& blob);

// ---- Applied state ----

struct TopicState {
  TopicId id;
  std::uint32_t replication_factor = 1;
  std::vector<NodeId> replicas;  // replica set, leader included
  std::optional<NodeId> leader;
  std::uint64_t leader_epoch = 0;  // config epoch of the last leadership change
  std::set<NodeId> isr;
  // Set by the promotion command; consumed by the incoming leader.
  std::uint64_t baseline_commit = 0;
  std::map<std::string, std::uint64_t> merged_offsets;
};

struct StageState {
  StageSpec spec;
  std::optional<NodeId> host;
  std::uint64_t placed_epoch = 0;
  bool moved_out = false;
};

struct MemberState {
  Role role = Role::worker;
  NodeStatus status = NodeStatus::up;
};

/// Quorum-replicated desired state of one cluster. Pure fold of the applied
/// command prefix; every master holds an identical copy per applied epoch.
struct ClusterConfig {
  std::uint64_t epoch = 0;
  std::map<TopicId, TopicState> topics;
  std::map<StageId, StageState> stages;
  std::map<NodeId, MemberState> membership;

  /// Applies one command; epoch increases by exactly 1.
  void apply(const ConfigCommand& cmd);

  /// Human-readable details for config_commit trace events.
  static Detail describe(const ConfigCommand& cmd);
};

}  // namespace edgesim
