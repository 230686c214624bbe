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

#include <filesystem>

#include "edgesim/scenario/scenario.hpp"
#include "edgesim/sim/node_runtime.hpp"

namespace edgesim {

struct DegradedStatus {
  bool no_quorum = false;
  bool wan_down = false;
  std::string summary() const;
};

/// Builds a deployment from a scenario and drives it: injects workload and
/// faults at their scheduled times, runs to completion, and dumps every
/// replica's durable topic log. Also the integration surface tests use to
/// poke at a live deployment (leaders, configs, runtime moves).
class World {
 public:
  explicit World(const Scenario& scenario,
                 std::optional<std::uint64_t> seed_override = std::nullopt);

  /// Runs the whole scenario (workload + faults) to scenario.run_until.
  void run_all();
  /// Advances virtual time, applying scheduled faults that fall inside.
  void run_until(SimTime t);

  SimKernel& kernel() { return kernel_; }
  const Scenario& scenario() const { return scenario_; }

  std::string trace_text() const { return kernel_.trace().to_string(); }
  void write_trace(const std::string& path) const;
  /// One framed-entry file per (topic, node-with-a-durable-log): topic@node.log
  void write_dumps(const std::string& dir) const;
  std::map<TopicId, std::map<NodeId, std::vector<Record>>> collect_dumps() const;

  // Introspection (ground truth, used by tests and the degraded-mode query).
  std::optional<NodeId> manager_leader(Cluster c);
  const ClusterConfig* config_of(const NodeId& master);
  DegradedStatus degraded_mode_status(Cluster c) const;
  const NodeRuntime* runtime_of(const NodeId& n);

  // Harness-level operations (delivered as messages into the simulation).
  void inject_generate(const StageId& stage, std::uint32_t count);
  /// Sends a ProposeReq to the cluster's current manager leader. Replies go
  /// nowhere; observe the effect through config epochs.
  void inject_propose(Cluster c, const ConfigCommand& cmd);
  /// Rewires a stage within one cluster as a single config transaction.
  void move_stage(Cluster c, const StageSpec& new_spec);
  /// Moves a stage across clusters: tombstone in `from`, create in `to`.
  void move_stage_across(Cluster from, Cluster to, const StageSpec& new_spec);

  static Cluster stage_cluster(const StageSpec& spec, const std::map<TopicId, Cluster>& topics);

 private:
  void apply_fault(const FaultEvent& f);

  Scenario scenario_;
  SimKernel kernel_;
  std::size_t next_fault_ = 0;
  std::vector<FaultEvent> faults_sorted_;
};

struct ExecuteResult {
  std::vector<std::pair<std::string, bool>> checks;  // name -> passed
  std::vector<std::string> report_lines;
  bool all_passed = true;
  std::string trace_path;
  std::string dump_dir;
};

/// Full CLI-style execution: run, write trace + dumps, evaluate the
/// scenario's declared checks over the written files.
ExecuteResult execute_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed,
                               const std::string& trace_path, const std::string& dump_dir);

}  // namespace edgesim
