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

#include "edgesim/cluster/config.hpp"

#include <algorithm>
#include <stdexcept>

#include "edgesim/sim/bytes.hpp"
#include "edgesim/sim/trace.hpp"

namespace edgesim {

const char* to_string(StageKind k) {
  switch (k) {
    case StageKind::source: return "source";
    case StageKind::transform: return "transform";
    case StageKind::bridge: return "bridge";
    case StageKind::sink: return "sink";
  }
  return "?";
}

const char* to_string(Affinity a) {
  switch (a) {
    case Affinity::edge: return "edge";
    case Affinity::cloud: return "cloud";
    case Affinity::any: return "any";
  }
  return "?";
}

std::string StageSpec::group() const {
  if (generation == 0) return id;
  return id + "~" + std::to_string(generation);
}

namespace {

enum CmdKind : std::uint8_t {
  kNoop = 0,
  kNodeStatus = 1,
  kCreateTopic = 2,
  kCreateStage = 3,
  kPlaceStage = 4,
  kTopicLeader = 5,
  kIsrRemove = 6,
  kIsrJoin = 7,
  kReplicaAdd = 8,
  kReplicaRemove = 9,
  kMoveStageIn = 10,
  kMoveStageOut = 11,
};

void encode_spec(ByteWriter& w, const StageSpec& s) {
  w.str16(s.id);
  w.u8(static_cast<std::uint8_t>(s.kind));
  w.str16(s.input.value_or(""));
  w.str16(s.output.value_or(""));
  w.u8(static_cast<std::uint8_t>(s.affinity));
  w.str16(s.transform_id);
  w.u64(s.generation);
  w.u64(s.input_start_offset);
}

StageSpec decode_spec(ByteReader& r) {
  StageSpec s;
  s.id = r.str16();
  s.kind = static_cast<StageKind>(r.u8());
  std::string in = r.str16();
  std::string out = r.str16();
  if (!in.empty()) s.input = in;
  if (!out.empty()) s.output = out;
  s.affinity = static_cast<Affinity>(r.u8());
  s.transform_id = r.str16();
  s.generation = r.u64();
  s.input_start_offset = r.u64();
  return s;
}

void encode_node_list(ByteWriter& w, const std::vector<NodeId>& ns) {
  w.u16(static_cast<std::uint16_t>(ns.size()));
  for (const auto& n : ns) w.str16(n);
}

std::vector<NodeId> decode_node_list(ByteReader& r) {
  std::vector<NodeId> out;
  std::uint16_t n = r.u16();
  for (std::uint16_t i = 0; i < n; ++i) out.push_back(r.str16());
  return out;
}

}  // namespace

const char* command_kind(const ConfigCommand& c) {
  switch (c.index()) {
    case kNoop: return "leader_claim";
    case kNodeStatus: return "node_status";
    case kCreateTopic: return "create_topic";
    case kCreateStage: return "create_stage";
    case kPlaceStage: return "place_stage";
    case kTopicLeader: return "topic_leader";
    case kIsrRemove: return "isr_remove";
    case kIsrJoin: return "isr_join";
    case kReplicaAdd: return "replica_add";
    case kReplicaRemove: return "replica_remove";
    case kMoveStageIn: return "move_stage_in";
    case kMoveStageOut: return "move_stage_out";
  }
  return "?";
}

Bytes encode_command(const ConfigCommand& c) {
  Bytes out;
  ByteWriter w(out);
  std::visit(
      [&](const auto& cmd) {
        using T = std::decay_t<decltype(cmd)>;
        if constexpr (std::is_same_v<T, NoopCmd>) {
          (void)cmd;
        } else if constexpr (std::is_same_v<T, NodeStatusCmd>) {
          w.str16(cmd.node);
          w.u8(static_cast<std::uint8_t>(cmd.status));
        } else if constexpr (std::is_same_v<T, CreateTopicCmd>) {
          w.str16(cmd.topic);
          w.u32(cmd.replication_factor);
          encode_node_list(w, cmd.replicas);
        } else if constexpr (std::is_same_v<T, CreateStageCmd>) {
          encode_spec(w, cmd.spec);
        } else if constexpr (std::is_same_v<T, PlaceStageCmd>) {
          w.str16(cmd.stage);
          w.str16(cmd.host);
        } else if constexpr (std::is_same_v<T, TopicLeaderCmd>) {
          w.str16(cmd.topic);
          w.str16(cmd.leader);
          encode_node_list(w, cmd.isr);
          w.u64(cmd.baseline_commit);
          w.u32(static_cast<std::uint32_t>(cmd.merged_offsets.size()));
          for (const auto& [g, o] : cmd.merged_offsets) {
            w.str16(g);
            w.u64(o);
          }
        } else if constexpr (std::is_same_v<T, IsrRemoveCmd> || std::is_same_v<T, IsrJoinCmd> ||
                             std::is_same_v<T, ReplicaAddCmd> ||
                             std::is_same_v<T, ReplicaRemoveCmd>) {
          w.str16(cmd.topic);
          w.str16(cmd.node);
        } else if constexpr (std::is_same_v<T, MoveStageInCmd>) {
          encode_spec(w, cmd.spec);
        } else if constexpr (std::is_same_v<T, MoveStageOutCmd>) {
          w.str16(cmd.stage);
        }
      },
      c);
  return out;
}

ConfigCommand decode_command(std::uint8_t kind, const Bytes& payload) {
  ByteReader r(payload);
  switch (kind) {
    case kNoop:
      return NoopCmd{};
    case kNodeStatus: {
      NodeStatusCmd c;
      c.node = r.str16();
      c.status = static_cast<NodeStatus>(r.u8());
      return c;
    }
    case kCreateTopic: {
      CreateTopicCmd c;
      c.topic = r.str16();
      c.replication_factor = r.u32();
      c.replicas = decode_node_list(r);
      return c;
    }
    case kCreateStage: {
      CreateStageCmd c;
      c.spec = decode_spec(r);
      return c;
    }
    case kPlaceStage: {
      PlaceStageCmd c;
      c.stage = r.str16();
      c.host = r.str16();
      return c;
    }
    case kTopicLeader: {
      TopicLeaderCmd c;
      c.topic = r.str16();
      c.leader = r.str16();
      c.isr = decode_node_list(r);
      c.baseline_commit = r.u64();
      std::uint32_t n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) {
        std::string g = r.str16();
        c.merged_offsets[g] = r.u64();
      }
      return c;
    }
    case kIsrRemove: {
      IsrRemoveCmd c;
      c.topic = r.str16();
      c.node = r.str16();
      return c;
    }
    case kIsrJoin: {
      IsrJoinCmd c;
      c.topic = r.str16();
      c.node = r.str16();
      return c;
    }
    case kReplicaAdd: {
      ReplicaAddCmd c;
      c.topic = r.str16();
      c.node = r.str16();
      return c;
    }
    case kReplicaRemove: {
      ReplicaRemoveCmd c;
      c.topic = r.str16();
      c.node = r.str16();
      return c;
    }
    case kMoveStageIn: {
      MoveStageInCmd c;
      c.spec = decode_spec(r);
      return c;
    }
    case kMoveStageOut: {
      MoveStageOutCmd c;
      c.stage = r.str16();
      return c;
    }
    default:
      throw std::invalid_argument("unknown config command kind");
  }
}

Bytes encode_config_log(const std::vector<ConfigLogEntry>& log) {
  Bytes out;
  ByteWriter w(out);
  for (const auto& e : log) {
    w.u64(e.slot + 1);  // the epoch this slot yields when committed
    w.u64(e.term);
    w.u8(static_cast<std::uint8_t>(e.cmd.index()));
    w.blob32(encode_command(e.cmd));
  }
  return out;
}

std::vector<ConfigLogEntry> decode_config_log(const Bytes& blob) {
  std::vector<ConfigLogEntry> out;
  ByteReader r(blob);
  while (!r.done()) {
    ConfigLogEntry e;
    e.slot = r.u64() - 1;
    e.term = r.u64();
    std::uint8_t kind = r.u8();
    e.cmd = decode_command(kind, r.blob32());
    out.push_back(std::move(e));
  }
  return out;
}

void ClusterConfig::apply(const ConfigCommand& cmd) {
  epoch += 1;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, NoopCmd>) {
          (void)c;
        } else if constexpr (std::is_same_v<T, NodeStatusCmd>) {
          membership[c.node].status = c.status;
        } else if constexpr (std::is_same_v<T, CreateTopicCmd>) {
          TopicState t;
          t.id = c.topic;
          t.replication_factor = c.replication_factor;
          t.replicas = c.replicas;
          if (!c.replicas.empty()) t.leader = c.replicas.front();
          t.leader_epoch = epoch;
          t.isr.insert(c.replicas.begin(), c.replicas.end());
          topics[c.topic] = std::move(t);
        } else if constexpr (std::is_same_v<T, CreateStageCmd>) {
          StageState s;
          s.spec = c.spec;
          stages[c.spec.id] = std::move(s);
        } else if constexpr (std::is_same_v<T, PlaceStageCmd>) {
          auto it = stages.find(c.stage);
          if (it != stages.end()) {
            if (c.host.empty())
              it->second.host.reset();
            else
              it->second.host = c.host;
            it->second.placed_epoch = epoch;
          }
        } else if constexpr (std::is_same_v<T, TopicLeaderCmd>) {
          auto it = topics.find(c.topic);
          if (it != topics.end()) {
            auto& t = it->second;
            if (c.leader.empty())
              t.leader.reset();
            else
              t.leader = c.leader;
            t.leader_epoch = epoch;
            t.isr = std::set<NodeId>(c.isr.begin(), c.isr.end());
            t.baseline_commit = c.baseline_commit;
            t.merged_offsets = c.merged_offsets;
          }
        } else if constexpr (std::is_same_v<T, IsrRemoveCmd>) {
          auto it = topics.find(c.topic);
          if (it != topics.end()) it->second.isr.erase(c.node);
        } else if constexpr (std::is_same_v<T, IsrJoinCmd>) {
          auto it = topics.find(c.topic);
          if (it != topics.end()) it->second.isr.insert(c.node);
        } else if constexpr (std::is_same_v<T, ReplicaAddCmd>) {
          auto it = topics.find(c.topic);
          if (it != topics.end()) {
            auto& rs = it->second.replicas;
            if (std::find(rs.begin(), rs.end(), c.node) == rs.end()) rs.push_back(c.node);
          }
        } else if constexpr (std::is_same_v<T, ReplicaRemoveCmd>) {
          auto it = topics.find(c.topic);
          if (it != topics.end()) {
            auto& t = it->second;
            std::erase(t.replicas, c.node);
            t.isr.erase(c.node);
            if (t.leader && *t.leader == c.node) t.leader.reset();
          }
        } else if constexpr (std::is_same_v<T, MoveStageInCmd>) {
          auto& s = stages[c.spec.id];
          s.spec = c.spec;
          s.host.reset();
          s.placed_epoch = epoch;
          s.moved_out = false;
        } else if constexpr (std::is_same_v<T, MoveStageOutCmd>) {
          auto it = stages.find(c.stage);
          if (it != stages.end()) {
            it->second.moved_out = true;
            it->second.host.reset();
          }
        }
      },
      cmd);
}

Detail ClusterConfig::describe(const ConfigCommand& cmd) {
  Detail d;
  d.emplace_back("cmd", command_kind(cmd));
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, NodeStatusCmd>) {
          d.emplace_back("target", c.node);
          d.emplace_back("status", to_string(c.status));
        } else if constexpr (std::is_same_v<T, CreateTopicCmd>) {
          d.emplace_back("topic", c.topic);
          d.emplace_back("rf", std::to_string(c.replication_factor));
        } else if constexpr (std::is_same_v<T, CreateStageCmd>) {
          d.emplace_back("stage", c.spec.id);
        } else if constexpr (std::is_same_v<T, PlaceStageCmd>) {
          d.emplace_back("stage", c.stage);
          d.emplace_back("host", c.host.empty() ? "pending" : c.host);
        } else if constexpr (std::is_same_v<T, TopicLeaderCmd>) {
          d.emplace_back("topic", c.topic);
          d.emplace_back("leader", c.leader.empty() ? "none" : c.leader);
        } else if constexpr (std::is_same_v<T, IsrRemoveCmd> || std::is_same_v<T, IsrJoinCmd> ||
                             std::is_same_v<T, ReplicaAddCmd> ||
                             std::is_same_v<T, ReplicaRemoveCmd>) {
          d.emplace_back("topic", c.topic);
          d.emplace_back("target", c.node);
        } else if constexpr (std::is_same_v<T, MoveStageInCmd>) {
          d.emplace_back("stage", c.spec.id);
          d.emplace_back("gen", std::to_string(c.spec.generation));
        } else if constexpr (std::is_same_v<T, MoveStageOutCmd>) {
          d.emplace_back("stage", c.stage);
        }
      },
      cmd);
  return d;
}

}  // namespace edgesim
