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
#include <stdexcept>

#include "edgesim/cluster/config.hpp"
#include "edgesim/sim/types.hpp"

namespace edgesim {

struct TopicDecl {
  TopicId id;
  Cluster cluster = Cluster::edge;
  std::uint32_t replication_factor = 1;
  std::vector<NodeId> replicas;  // optional, first = initial leader
};

struct WorkloadEvent {
  SimTime time = 0;
  StageId stage;
  std::uint32_t count = 0;
};

struct FaultEvent {
  enum class Kind : std::uint8_t { crash, restart, partition, heal };
  SimTime time = 0;
  Kind kind = Kind::crash;
  std::string target;  // node id, or a net domain name for partition/heal
};

const char* to_string(FaultEvent::Kind k);

struct CheckDecl {
  std::string name;
  std::map<std::string, std::string> args;
};

/// A declarative run: topology, topics, pipeline wiring, workload, fault
/// schedule, and the named properties to verify afterwards.
struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  SimTime run_until = 0;
  SimParams params;
  std::vector<NodeInfo> nodes;
  std::vector<TopicDecl> topics;
  std::vector<StageSpec> pipeline;  // wiring order: source ... sink
  std::vector<WorkloadEvent> workload;
  std::vector<FaultEvent> faults;
  std::vector<CheckDecl> checks;

  std::map<TopicId, Cluster> topic_directory() const;
  const StageSpec* sink() const;
  const StageSpec* bridge() const;
  std::vector<StageId> source_ids() const;
};

/// Carries every problem found, each prefixed "line N: ".
struct ScenarioError : std::runtime_error {
  explicit ScenarioError(std::vector<std::string> errs);
  std::vector<std::string> errors;
};

Scenario parse_scenario(const std::string& text);
std::string print_scenario(const Scenario& s);
Scenario load_scenario_file(const std::string& path);

const std::vector<std::string>& builtin_scenario_names();
/// Loads "<dir>/<name>.scn" for every builtin name.
std::vector<Scenario> builtin_scenarios(const std::string& dir);

}  // namespace edgesim
