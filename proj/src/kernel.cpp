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

#include "edgesim/sim/kernel.hpp"

#include <algorithm>

namespace edgesim {

const Bytes* DurableStore::get(const std::string& key) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? nullptr : &it->second;
}

void DurableStore::append(const std::string& key, const Bytes& tail) {
  auto& v = kv_[key];
  v.insert(v.end(), tail.begin(), tail.end());
}

std::vector<std::string> DurableStore::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (auto it = kv_.lower_bound(prefix); it != kv_.end(); ++it) {
    if (it->first.compare(0, prefix.size(), prefix) != 0) break;
    out.push_back(it->first);
  }
  return out;
}

SimTime Runtime::now() const { return kernel_.now(); }
const NodeInfo& Runtime::self_info() const { return kernel_.info_of(node_); }
const SimParams& Runtime::params() const { return kernel_.params(); }
const std::vector<NodeInfo>& Runtime::directory() const { return kernel_.directory(); }

void Runtime::send(const NodeId& to, MessagePtr m) { kernel_.send(node_, to, std::move(m)); }

std::uint64_t Runtime::schedule_self(SimTime delay, MessagePtr m) {
  return kernel_.schedule(kernel_.now() + delay, node_, std::move(m), node_,
                          SimKernel::EventKind::self);
}

DurableStore& Runtime::disk() { return kernel_.disk_of(node_); }

std::uint64_t Runtime::rand_range(std::uint64_t lo, std::uint64_t hi) {
  return kernel_.rand_range(lo, hi);
}

void Runtime::trace(const std::string& kind, Detail detail) {
  kernel_.emit(kind, node_, std::move(detail));
}

SimKernel::SimKernel(std::uint64_t seed, SimParams params) : params_(params), rng_(seed) {}

void SimKernel::add_node(NodeInfo info, ProcessFactory factory) {
  if (started_) throw std::logic_error("add_node after start");
  if (nodes_.count(info.id)) throw std::invalid_argument("duplicate node id: " + info.id);
  Node n;
  n.info = info;
  n.factory = std::move(factory);
  directory_.push_back(info);
  nodes_.emplace(info.id, std::move(n));
}

void SimKernel::start() {
  if (started_) throw std::logic_error("start called twice");
  started_ = true;
  for (auto& [id, n] : nodes_) {
    n.rt = std::make_unique<Runtime>(*this, id);
    n.proc = n.factory();
    n.proc->on_start(*n.rt);
  }
}

const NodeInfo& SimKernel::info_of(const NodeId& n) const { return node_ref(n).info; }

bool SimKernel::node_up(const NodeId& n) const { return node_ref(n).up; }

NetDomain SimKernel::domain_between(const NodeId& a, const NodeId& b) const {
  Cluster ca = node_ref(a).info.cluster;
  Cluster cb = node_ref(b).info.cluster;
  if (ca != cb) return NetDomain::wan;
  return ca == Cluster::edge ? NetDomain::edge_lan : NetDomain::cloud_lan;
}

SimTime SimKernel::latency(NetDomain d) const {
  switch (d) {
    case NetDomain::edge_lan: return params_.edge_lan_latency;
    case NetDomain::cloud_lan: return params_.cloud_lan_latency;
    case NetDomain::wan: return params_.wan_latency;
  }
  return 1;
}

std::uint64_t SimKernel::schedule(SimTime at, const NodeId& node, MessagePtr m,
                                  const NodeId& from, EventKind kind) {
  if (at < now_) throw std::logic_error("schedule in the past");
  Event e;
  e.at = at;
  e.seq = next_event_seq_++;
  e.to = node;
  e.from = from;
  e.kind = kind;
  e.msg = std::move(m);
  if (kind == EventKind::self && nodes_.count(node)) e.incarnation = node_ref(node).incarnation;
  queue_.push(e);
  return e.seq;
}

void SimKernel::send(const NodeId& from, const NodeId& to, MessagePtr m) {
  const Node& src = node_ref(from);
  if (!src.up) throw std::logic_error("send from crashed node " + from);
  if (!nodes_.count(to)) {
    emit("drop", "-", {{"to", to}, {"from", from}, {"reason", "unknown_node"},
                       {"msg", m->type_name()}});
    return;
  }
  NetDomain d = domain_between(from, to);
  if (partitioned(d)) {
    emit("drop", "-", {{"to", to}, {"from", from}, {"reason", "partition"},
                       {"domain", to_string(d)}, {"msg", m->type_name()}});
    return;
  }
  schedule(now_ + latency(d), to, std::move(m), from, EventKind::network);
}

void SimKernel::set_partition(NetDomain d, bool state) {
  if (partitioned_[static_cast<int>(d)] == state) return;  // idempotent
  partitioned_[static_cast<int>(d)] = state;
  emit("partition", "-", {{"domain", to_string(d)}, {"state", state ? "on" : "off"}});
}

void SimKernel::crash_node(const NodeId& n) {
  Node& node = node_ref(n);
  if (!node.up) return;  // idempotent
  node.up = false;
  node.proc.reset();  // volatile state gone; disk untouched
  emit("crash", n, {});
}

void SimKernel::restart_node(const NodeId& n) {
  Node& node = node_ref(n);
  if (node.up) throw std::logic_error("restart of a node that is up: " + n);
  node.up = true;
  node.incarnation++;
  emit("restart", n, {});
  node.proc = node.factory();
  node.proc->on_start(*node.rt);
}

std::vector<TraceEvent> SimKernel::run_until(SimTime t) {
  if (!started_) throw std::logic_error("run_until before start");
  if (t < now_) throw std::logic_error("run_until into the past");
  std::size_t first = trace_.size();
  while (!queue_.empty() && queue_.top().at <= t) {
    Event e = queue_.top();
    queue_.pop();
    now_ = e.at;
    deliver(e);
  }
  now_ = t;
  const auto& all = trace_.events();
  return std::vector<TraceEvent>(all.begin() + static_cast<std::ptrdiff_t>(first), all.end());
}

void SimKernel::run_to_exclusive(SimTime t) {
  if (!started_) throw std::logic_error("run before start");
  if (t < now_) throw std::logic_error("run into the past");
  while (!queue_.empty() && queue_.top().at < t) {
    Event e = queue_.top();
    queue_.pop();
    now_ = e.at;
    deliver(e);
  }
  now_ = t;
}

Process* SimKernel::process_of(const NodeId& n) {
  Node& node = node_ref(n);
  return node.up ? node.proc.get() : nullptr;
}

void SimKernel::deliver(const Event& e) {
  Node& node = node_ref(e.to);
  if (!node.up) {
    emit("drop", "-", {{"to", e.to}, {"from", e.from}, {"reason", "crashed"},
                       {"msg", e.msg->type_name()}});
    return;
  }
  if (e.kind == EventKind::network) {
    NetDomain d = domain_between(e.from, e.to);
    if (partitioned(d)) {
      // In flight when the partition started; a partitioned domain delivers
      // nothing for the whole interval.
      emit("drop", "-", {{"to", e.to}, {"from", e.from}, {"reason", "partition"},
                         {"domain", to_string(d)}, {"msg", e.msg->type_name()}});
      return;
    }
    emit("deliver", e.to, {{"from", e.from}, {"domain", to_string(d)},
                           {"msg", e.msg->type_name()}});
  } else if (e.kind == EventKind::self && e.incarnation != node.incarnation) {
    // Timer armed by a previous incarnation of a quickly-restarted node.
    return;
  }
  node.proc->on_message(*node.rt, e.from, *e.msg);
}

void SimKernel::emit(const std::string& kind, const std::string& node, Detail detail) {
  trace_.emit(now_, kind, node, std::move(detail));
}

std::uint64_t SimKernel::rand_range(std::uint64_t lo, std::uint64_t hi) {
  if (hi < lo) throw std::invalid_argument("rand_range: hi < lo");
  return lo + rng_() % (hi - lo + 1);
}

DurableStore& SimKernel::disk_of(const NodeId& n) { return node_ref(n).disk; }
const DurableStore& SimKernel::disk_of(const NodeId& n) const { return node_ref(n).disk; }

std::uint64_t SimKernel::incarnation_of(const NodeId& n) const { return node_ref(n).incarnation; }

SimKernel::Node& SimKernel::node_ref(const NodeId& n) {
  auto it = nodes_.find(n);
  if (it == nodes_.end()) throw std::invalid_argument("unknown node: " + n);
  return it->second;
}

const SimKernel::Node& SimKernel::node_ref(const NodeId& n) const {
  auto it = nodes_.find(n);
  if (it == nodes_.end()) throw std::invalid_argument("unknown node: " + n);
  return it->second;
}

}  // namespace edgesim
