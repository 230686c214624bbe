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

#include "edgesim/world/world.hpp"

#include <algorithm>
#include <fstream>

#include "edgesim/check/checker.hpp"

namespace edgesim {

std::string DegradedStatus::summary() const {
  if (no_quorum && wan_down) return "degraded_no_quorum+degraded_wan_down";
  if (no_quorum) return "degraded_no_quorum";
  if (wan_down) return "degraded_wan_down";
  return "normal";
}

Cluster World::stage_cluster(const StageSpec& spec, const std::map<TopicId, Cluster>& topics) {
  switch (spec.affinity) {
    case Affinity::edge: return Cluster::edge;
    case Affinity::cloud: return Cluster::cloud;
    case Affinity::any: break;
  }
  if (spec.input) {
    auto it = topics.find(*spec.input);
    if (it != topics.end()) return it->second;
  }
  return Cluster::edge;
}

World::World(const Scenario& scenario, std::optional<std::uint64_t> seed_override)
    : scenario_(scenario),
      kernel_(seed_override.value_or(scenario.seed), scenario.params) {
  auto topic_dir = scenario_.topic_directory();

  ManagerDesired desired_edge, desired_cloud;
  for (const auto& t : scenario_.topics) {
    DesiredTopic d{t.id, t.replication_factor, t.replicas};
    (t.cluster == Cluster::edge ? desired_edge : desired_cloud).topics.push_back(d);
  }
  for (const auto& st : scenario_.pipeline) {
    Cluster c = stage_cluster(st, topic_dir);
    (c == Cluster::edge ? desired_edge : desired_cloud).stages.push_back(st);
  }

  for (const auto& n : scenario_.nodes) {
    bool is_master = n.role == Role::master;
    ManagerDesired desired = n.cluster == Cluster::edge ? desired_edge : desired_cloud;
    kernel_.add_node(n, [is_master, desired, topic_dir]() {
      return std::make_unique<NodeRuntime>(is_master, desired, topic_dir);
    });
  }

  faults_sorted_ = scenario_.faults;
  std::stable_sort(faults_sorted_.begin(), faults_sorted_.end(),
                   [](const FaultEvent& a, const FaultEvent& b) { return a.time < b.time; });

  kernel_.start();

  for (const auto& w : scenario_.workload) {
    auto msg = std::make_shared<GenerateCmd>();
    msg->stage = w.stage;
    msg->count = w.count;
    for (const auto& n : scenario_.nodes) kernel_.schedule(w.time, n.id, msg);
  }
}

void World::apply_fault(const FaultEvent& f) {
  kernel_.emit("fault", "-", {{"kind", to_string(f.kind)}, {"target", f.target}});
  switch (f.kind) {
    case FaultEvent::Kind::crash:
      kernel_.crash_node(f.target);
      break;
    case FaultEvent::Kind::restart:
      kernel_.restart_node(f.target);
      break;
    case FaultEvent::Kind::partition:
    case FaultEvent::Kind::heal: {
      NetDomain d = NetDomain::wan;
      if (f.target == "edge_lan") d = NetDomain::edge_lan;
      else if (f.target == "cloud_lan") d = NetDomain::cloud_lan;
      kernel_.set_partition(d, f.kind == FaultEvent::Kind::partition);
      break;
    }
  }
}

void World::run_until(SimTime t) {
  while (next_fault_ < faults_sorted_.size() && faults_sorted_[next_fault_].time <= t) {
    const FaultEvent& f = faults_sorted_[next_fault_];
    kernel_.run_to_exclusive(f.time);  // faults land ahead of same-time deliveries
    apply_fault(f);
    next_fault_++;
  }
  kernel_.run_until(t);
}

void World::run_all() { run_until(scenario_.run_until); }

void World::write_trace(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write trace file: " + path);
  kernel_.trace().write(f);
}

std::map<TopicId, std::map<NodeId, std::vector<Record>>> World::collect_dumps() const {
  std::map<TopicId, std::map<NodeId, std::vector<Record>>> out;
  for (const auto& n : scenario_.nodes) {
    const DurableStore& disk = kernel_.disk_of(n.id);
    for (const auto& key : disk.keys_with_prefix("topic/")) {
      // key = topic/<id>/log
      if (key.size() < 10 || key.compare(key.size() - 4, 4, "/log") != 0) continue;
      TopicId topic = key.substr(6, key.size() - 6 - 4);
      out[topic][n.id] = decode_records(*disk.get(key));
    }
  }
  return out;
}

void World::write_dumps(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [topic, replicas] : collect_dumps()) {
    for (const auto& [node, records] : replicas) {
      write_dump_file(dir + "/" + topic + "@" + node + ".log", records);
    }
  }
}

const NodeRuntime* World::runtime_of(const NodeId& n) {
  return dynamic_cast<const NodeRuntime*>(kernel_.process_of(n));
}

std::optional<NodeId> World::manager_leader(Cluster c) {
  for (const auto& n : scenario_.nodes) {
    if (n.cluster != c || n.role != Role::master) continue;
    const NodeRuntime* r = runtime_of(n.id);
    if (r && r->manager() && r->manager()->role() == ManagerCore::MgrRole::leader) return n.id;
  }
  return std::nullopt;
}

const ClusterConfig* World::config_of(const NodeId& master) {
  const NodeRuntime* r = runtime_of(master);
  if (!r || !r->manager()) return nullptr;
  return &r->manager()->config();
}

DegradedStatus World::degraded_mode_status(Cluster c) const {
  DegradedStatus st;
  std::uint64_t masters = 0, up = 0;
  for (const auto& n : scenario_.nodes) {
    if (n.cluster != c || n.role != Role::master) continue;
    masters++;
    if (kernel_.node_up(n.id)) up++;
  }
  st.no_quorum = masters > 0 && up < quorum(masters);
  st.wan_down = kernel_.partitioned(NetDomain::wan);
  return st;
}

void World::inject_generate(const StageId& stage, std::uint32_t count) {
  auto msg = std::make_shared<GenerateCmd>();
  msg->stage = stage;
  msg->count = count;
  for (const auto& n : scenario_.nodes) kernel_.schedule(kernel_.now(), n.id, msg);
}

void World::inject_propose(Cluster c, const ConfigCommand& cmd) {
  auto leader = manager_leader(c);
  if (!leader) throw std::runtime_error("no manager leader in cluster");
  auto msg = std::make_shared<ProposeReq>();
  msg->cmd = cmd;
  msg->req_id = 0;
  kernel_.schedule(kernel_.now(), *leader, msg);
}

void World::move_stage(Cluster c, const StageSpec& new_spec) {
  inject_propose(c, MoveStageInCmd{new_spec});
}

void World::move_stage_across(Cluster from, Cluster to, const StageSpec& new_spec) {
  inject_propose(from, MoveStageOutCmd{new_spec.id});
  inject_propose(to, MoveStageInCmd{new_spec});
}

ExecuteResult execute_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed,
                               const std::string& trace_path, const std::string& dump_dir) {
  World world(scenario, seed);
  world.run_all();
  world.write_trace(trace_path);
  world.write_dumps(dump_dir);

  ExecuteResult res;
  res.trace_path = trace_path;
  res.dump_dir = dump_dir;
  check::RunArtifacts art = check::RunArtifacts::load(trace_path, dump_dir);
  for (const auto& cr : check::run_scenario_checks(art, scenario)) {
    res.checks.emplace_back(cr.name, cr.passed);
    res.report_lines.push_back(check::report_line(cr));
    if (!cr.passed) res.all_passed = false;
  }
  return res;
}

}  // namespace edgesim
