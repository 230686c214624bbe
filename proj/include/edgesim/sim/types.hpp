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

#include <cstdint>
#include <string>
#include <vector>

namespace edgesim {

/// Virtual time in integer milliseconds. Monotonically non-decreasing during a run.
using SimTime = std::uint64_t;

using Bytes = std::vector<std::uint8_t>;

using NodeId = std::string;
using TopicId = std::string;
using StageId = std::string;

enum class Cluster : std::uint8_t { edge, cloud };
enum class NetDomain : std::uint8_t { edge_lan, cloud_lan, wan };
enum class Role : std::uint8_t { master, worker };
enum class NodeStatus : std::uint8_t { up, suspected, failed };

const char* to_string(Cluster c);
const char* to_string(NetDomain d);
const char* to_string(Role r);
const char* to_string(NodeStatus s);

/// Tunables for one simulated run. Defaults match the documented scenario
/// semantics; scenario files may override the latency and replication knobs.
struct SimParams {
  SimTime edge_lan_latency = 1;
  SimTime cloud_lan_latency = 1;
  SimTime wan_latency = 50;

  SimTime heartbeat_interval = 100;
  SimTime suspect_timeout = 500;
  SimTime fail_timeout = 1000;
  SimTime election_timeout_min = 150;
  SimTime election_timeout_max = 300;

  SimTime stage_tick = 20;
  SimTime broker_tick = 50;
  SimTime rpc_timeout = 400;

  std::uint32_t batch_size = 16;
  std::uint32_t replication_window = 64;
  bool re_replication = true;
};

/// Majority size for a group of n voters/replicas.
constexpr std::uint64_t quorum(std::uint64_t n) { return n / 2 + 1; }

struct NodeInfo {
  NodeId id;
  Cluster cluster = Cluster::edge;
  Role role = Role::worker;
};

}  // namespace edgesim
