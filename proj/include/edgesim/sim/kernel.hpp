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

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>

#include "edgesim/sim/trace.hpp"
#include "edgesim/sim/types.hpp"

namespace edgesim {

class SimKernel;
class Runtime;

/// Base of every simulated message. All cross-node coordination is explicit
/// message passing through the kernel; messages are immutable once sent.
struct MessageBase {
  virtual ~MessageBase() = default;
  virtual const char* type_name() const = 0;
};

using MessagePtr = std::shared_ptr<const MessageBase>;

template <typename T, typename... Args>
MessagePtr make_msg(Args&&... args) {
  return std::make_shared<const T>(T{std::forward<Args>(args)...});
}

/// The volatile half of a node. Destroyed on crash and rebuilt from the
/// registered factory on restart; anything that must survive goes through
/// Runtime::disk().
class Process {
 public:
  virtual ~Process() = default;
  virtual void on_start(Runtime& rt) = 0;
  virtual void on_message(Runtime& rt, const NodeId& from, const MessageBase& m) = 0;
};

using ProcessFactory = std::function<std::unique_ptr<Process>()>;

/// Durable key-to-bytes store; survives crashes, wiped only by the harness.
class DurableStore {
 public:
  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  const Bytes* get(const std::string& key) const;
  void put(const std::string& key, Bytes value) { kv_[key] = std::move(value); }
  void append(const std::string& key, const Bytes& tail);
  void erase(const std::string& key) { kv_.erase(key); }
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

 private:
  std::map<std::string, Bytes> kv_;
};

/// Kernel facade handed to a node's process. The process may not observe
/// wall-clock time or ambient randomness; everything comes through here.
class Runtime {
 public:
  Runtime(SimKernel& kernel, const NodeId& node) : kernel_(kernel), node_(node) {}

  SimTime now() const;
  const NodeId& self() const { return node_; }
  const NodeInfo& self_info() const;
  const SimParams& params() const;
  const std::vector<NodeInfo>& directory() const;

  void send(const NodeId& to, MessagePtr m);
  std::uint64_t schedule_self(SimTime delay, MessagePtr m);
  DurableStore& disk();
  std::uint64_t rand_range(std::uint64_t lo, std::uint64_t hi);
  void trace(const std::string& kind, Detail detail);

 private:
  SimKernel& kernel_;
  NodeId node_;
};

/// Deterministic discrete-event engine: virtual time, seeded randomness, a
/// simulated network with per-domain latency and partitions, and node
/// crash/restart with durable-vs-volatile state separation. Events at equal
/// time are processed in insertion order.
class SimKernel {
 public:
  SimKernel(std::uint64_t seed, SimParams params);

  void add_node(NodeInfo info, ProcessFactory factory);
  /// Calls on_start on every node at t=0. Must run once before run_until.
  void start();

  SimTime now() const { return now_; }
  const SimParams& params() const { return params_; }
  const std::vector<NodeInfo>& directory() const { return directory_; }
  const NodeInfo& info_of(const NodeId& n) const;
  bool node_up(const NodeId& n) const;
  NetDomain domain_between(const NodeId& a, const NodeId& b) const;
  bool partitioned(NetDomain d) const { return partitioned_[static_cast<int>(d)]; }
  SimTime latency(NetDomain d) const;

  /// How a queued event is treated at delivery time. Self-scheduled timers
  /// die with the incarnation that armed them; network messages obey the
  /// partition state; world events (workload, harness commands) only require
  /// the target to be up.
  enum class EventKind : std::uint8_t { self, network, world };

  /// Enqueue a message for `node` at absolute time `at`. Rejects at < now.
  std::uint64_t schedule(SimTime at, const NodeId& node, MessagePtr m,
                         const NodeId& from = "-", EventKind kind = EventKind::world);

  void send(const NodeId& from, const NodeId& to, MessagePtr m);
  void set_partition(NetDomain d, bool state);
  void crash_node(const NodeId& n);
  void restart_node(const NodeId& n);

  /// Process all events with time <= t in (time, seq) order; returns the
  /// trace events emitted during this call.
  std::vector<TraceEvent> run_until(SimTime t);
  /// Process all events with time < t, then set now to t. Lets the harness
  /// apply faults at t ahead of same-time deliveries.
  void run_to_exclusive(SimTime t);

  /// Volatile process of a live node, or nullptr while crashed.
  Process* process_of(const NodeId& n);

  const TraceLog& trace() const { return trace_; }
  void emit(const std::string& kind, const std::string& node, Detail detail);
  std::uint64_t rand_range(std::uint64_t lo, std::uint64_t hi);

  DurableStore& disk_of(const NodeId& n);
  const DurableStore& disk_of(const NodeId& n) const;
  std::uint64_t incarnation_of(const NodeId& n) const;

 private:
  struct Node {
    NodeInfo info;
    bool up = true;
    std::uint64_t incarnation = 0;
    DurableStore disk;
    ProcessFactory factory;
    std::unique_ptr<Process> proc;
    std::unique_ptr<Runtime> rt;
  };

  struct Event {
    SimTime at = 0;
    std::uint64_t seq = 0;
    NodeId to;
    NodeId from;
    EventKind kind = EventKind::world;
    std::uint64_t incarnation = 0;  // for self-scheduled messages
    MessagePtr msg;
  };
  struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  Node& node_ref(const NodeId& n);
  const Node& node_ref(const NodeId& n) const;
  void deliver(const Event& e);

  SimParams params_;
  SimTime now_ = 0;
  std::uint64_t next_event_seq_ = 0;
  bool started_ = false;
  std::map<NodeId, Node> nodes_;
  std::vector<NodeInfo> directory_;
  bool partitioned_[3] = {false, false, false};
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::mt19937_64 rng_;
  TraceLog trace_;
};

}  // namespace edgesim
