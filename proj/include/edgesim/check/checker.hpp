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

#include "edgesim/log/record.hpp"
#include "edgesim/scenario/scenario.hpp"
#include "edgesim/sim/trace.hpp"

namespace edgesim::check {

/// Malformed inputs raise this instead of failing a property.
struct ParseFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string evidence;  // first violation or summary counts; never empty on failure
};

std::string report_line(const CheckResult& r);

struct Identity {
  std::string producer;
  std::uint64_t seq = 0;
  auto operator<=>(const Identity&) const = default;
  std::string str() const { return producer + "/" + std::to_string(seq); }
};

/// A completed run as files: the trace plus one dump per (topic, replica).
struct RunArtifacts {
  std::vector<TraceEvent> trace;
  std::map<TopicId, std::map<NodeId, std::vector<Record>>> dumps;

  static RunArtifacts load(const std::string& trace_path, const std::string& dump_dir);
};

// Building blocks (pure functions over the artifacts).
std::map<TopicId, std::uint64_t> final_commit_counts(const std::vector<TraceEvent>& trace);
/// The committed slice of a topic, cross-checked for prefix consistency
/// across every replica dump. Throws ParseFailure on inconsistency.
std::vector<Record> committed_view(const RunArtifacts& art, const TopicId& topic);
std::map<Identity, Bytes> dedup_view(const std::vector<Record>& records);
/// (producer, seq) pairs acknowledged by topic leaders, optionally filtered
/// by acking client and time window [0, before).
std::set<Identity> acked_identities(const std::vector<TraceEvent>& trace, const TopicId& topic,
                                    const std::set<std::string>* clients = nullptr,
                                    std::optional<SimTime> before = std::nullopt);
/// Nodes that are up at the end of the trace.
std::set<NodeId> up_nodes_at_end(const std::vector<TraceEvent>& trace,
                                 const std::vector<NodeInfo>& nodes);

CheckResult check_no_loss(const RunArtifacts& art, const Scenario& scenario);
CheckResult check_equivalence(const std::vector<Record>& sink_a,
                              const std::vector<Record>& sink_b);
CheckResult check_order(const std::vector<Record>& sink_committed);
CheckResult check_reschedule(const RunArtifacts& art, const StageId& stage,
                             const NodeId& failed_node, SimTime bound);
CheckResult check_buffering(const RunArtifacts& art, const Scenario& scenario, SimTime from,
                            SimTime to);

std::vector<CheckResult> run_scenario_checks(const RunArtifacts& art, const Scenario& scenario);

}  // namespace edgesim::check
