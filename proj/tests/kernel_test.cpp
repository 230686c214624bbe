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

#include <doctest.h>

#include "test_util.hpp"

using namespace edgesim;
using namespace edgesim::test;

namespace {

SimParams lan_params() {
  SimParams p;
  p.edge_lan_latency = 1;
  p.cloud_lan_latency = 1;
  p.wan_latency = 50;
  return p;
}

std::unique_ptr<SimKernel> two_cluster_kernel(std::vector<Probe::Seen>* sink,
                                              std::uint64_t seed = 1) {
  auto k = std::make_unique<SimKernel>(seed, lan_params());
  k->add_node({"EN-1", Cluster::edge, Role::worker}, probe_factory(sink));
  k->add_node({"EN-2", Cluster::edge, Role::worker}, probe_factory(sink));
  k->add_node({"CN-1", Cluster::cloud, Role::worker}, probe_factory(sink));
  k->start();
  return k;
}

std::size_t count_kind(const std::vector<TraceEvent>& evs, const std::string& kind) {
  std::size_t n = 0;
  for (const auto& e : evs) {
    if (e.kind == kind) n++;
  }
  return n;
}

}  // namespace

TEST_CASE("zero-delay self message is delivered in the same step") {
  std::vector<Probe::Seen> seen;
  auto k = two_cluster_kernel(&seen);
  k->schedule(k->now(), "EN-1", note("tick"), "EN-1", SimKernel::EventKind::self);
  k->run_until(0);
  REQUIRE(seen.size() == 1);
  CHECK(seen[0].time == 0);
  CHECK(seen[0].text == "tick");
}

TEST_CASE("scheduling in the past is a harness bug") {
  std::vector<Probe::Seen> seen;
  auto k = two_cluster_kernel(&seen);
  k->run_until(10);
  CHECK_THROWS_AS(k->schedule(5, "EN-1", note("late")), std::logic_error);
}

TEST_CASE("message to a node crashed before delivery is dropped with a trace record") {
  std::vector<Probe::Seen> seen;
  auto k = two_cluster_kernel(&seen);
  k->schedule(10, "EN-2", note("will-miss"));
  k->crash_node("EN-2");
  auto delta = k->run_until(20);
  CHECK(seen.empty());
  REQUIRE(count_kind(delta, "drop") == 1);
  for (const auto& e : delta) {
    if (e.kind == "drop") {
      CHECK(e.get("to") == "EN-2");
      CHECK(e.get("reason") == "crashed");
    }
  }
}

TEST_CASE("lan send is delivered at now plus the domain latency") {
  std::vector<Probe::Seen> seen;
  auto k = two_cluster_kernel(&seen);
  k->run_until(100);
  k->send("EN-1", "EN-2", note("hi"));
  k->run_until(200);
  REQUIRE(seen.size() == 1);
  CHECK(seen[0].time == 101);
  CHECK(seen[0].from == "EN-1");
}

TEST_CASE("wan partition drops edge-to-cloud sends and heal restores them") {
  std::vector<Probe::Seen> seen;
  auto k = two_cluster_kernel(&seen);
  k->set_partition(NetDomain::wan, true);
  k->send("EN-1", "CN-1", note("lost"));
  k->run_until(100);
  CHECK(seen.empty());
  CHECK(count_kind(k->trace().events(), "drop") == 1);

  k->set_partition(NetDomain::wan, false);
  k->send("EN-1", "CN-1", note("through"));
  k->run_until(200);
  REQUIRE(seen.size() == 1);
  CHECK(seen[0].time == 150);  // heal at 100, wan latency 50
}

TEST_CASE("set_partition is idempotent and emits only on change") {
  std::vector<Probe::Seen> seen;
  auto k = two_cluster_kernel(&seen);
  k->set_partition(NetDomain::wan, false);  // already false
  CHECK(count_kind(k->trace().events(), "partition") == 0);
  k->set_partition(NetDomain::wan, true);
  k->set_partition(NetDomain::wan, true);
  CHECK(count_kind(k->trace().events(), "partition") == 1);
}

TEST_CASE("no delivery crosses a partitioned domain, including in-flight messages") {
  std::vector<Probe::Seen> seen;
  auto k = two_cluster_kernel(&seen);
  k->send("EN-1", "CN-1", note("in-flight"));  // delivery due at 50
  k->run_until(20);
  k->set_partition(NetDomain::wan, true);  // partition window [20, 120)
  auto window = k->run_until(119);
  for (const auto& e : window) {
    CHECK(e.kind != "deliver");
  }
  CHECK(count_kind(window, "drop") == 1);
  CHECK(seen.empty());
}

TEST_CASE("crash wipes volatile state and restart rebuilds from the durable store") {
  std::vector<Probe::Seen> seen;
  SimParams p = lan_params();
  SimKernel k(7, p);
  // The process counts its own restarts in volatile state but persists a key.
  struct Counter : Process {
    void on_start(Runtime& rt) override {
      volatile_count = 0;
      if (const Bytes* b = rt.disk().get("boots")) {
        Bytes nb = *b;
        nb.push_back(1);
        rt.disk().put("boots", nb);
      } else {
        rt.disk().put("boots", Bytes{1});
      }
    }
    void on_message(Runtime&, const NodeId&, const MessageBase&) override { volatile_count++; }
    int volatile_count = 0;
  };
  k.add_node({"EN-1", Cluster::edge, Role::worker}, [] { return std::make_unique<Counter>(); });
  k.start();
  k.schedule(1, "EN-1", note("a"));
  k.run_until(5);
  auto* before = dynamic_cast<Counter*>(k.process_of("EN-1"));
  REQUIRE(before != nullptr);
  CHECK(before->volatile_count == 1);

  k.crash_node("EN-1");
  k.crash_node("EN-1");  // idempotent
  CHECK(k.process_of("EN-1") == nullptr);
  k.run_until(10);
  k.restart_node("EN-1");
  auto* after = dynamic_cast<Counter*>(k.process_of("EN-1"));
  REQUIRE(after != nullptr);
  CHECK(after->volatile_count == 0);                     // volatile state gone
  CHECK(k.disk_of("EN-1").get("boots")->size() == 2);    // durable kept, both boots seen
}

TEST_CASE("restart with no prior durable writes joins empty") {
  SimParams p = lan_params();
  SimKernel k(7, p);
  std::vector<Probe::Seen> seen;
  k.add_node({"EN-1", Cluster::edge, Role::worker}, probe_factory(&seen));
  k.start();
  k.crash_node("EN-1");
  k.run_until(10);
  k.restart_node("EN-1");
  CHECK(k.disk_of("EN-1").keys_with_prefix("").empty());
}

TEST_CASE("run_until with an empty queue returns an empty trace delta") {
  std::vector<Probe::Seen> seen;
  auto k = two_cluster_kernel(&seen);
  k->run_until(50);
  auto delta = k->run_until(50);
  CHECK(delta.empty());
}

TEST_CASE("events at equal time dispatch in insertion order") {
  std::vector<Probe::Seen> seen;
  auto k = two_cluster_kernel(&seen);
  k->schedule(10, "EN-1", note("first"));
  k->schedule(10, "EN-1", note("second"));
  k->schedule(10, "EN-1", note("third"));
  k->run_until(10);
  REQUIRE(seen.size() == 3);
  CHECK(seen[0].text == "first");
  CHECK(seen[1].text == "second");
  CHECK(seen[2].text == "third");
}

TEST_CASE("identical seed and schedule produce byte-identical traces") {
  // Re-run oracle: 1000 injected messages, each forwarded a few network hops
  // to seeded-random targets; the trace is the observable history.
  auto run_once = [](std::uint64_t seed) {
    std::vector<Probe::Seen> seen;
    std::vector<NodeId> nodes = {"EN-1", "EN-2", "CN-1"};
    auto script = [nodes](Runtime& rt, const NodeId&, const MessageBase& m) {
      auto* n = dynamic_cast<const NoteMsg*>(&m);
      if (!n || n->text.size() > 8) return;
      rt.send(nodes[rt.rand_range(0, 2)], note(n->text + ">"));
    };
    SimKernel k(seed, lan_params());
    for (const auto& nid : nodes) {
      Cluster c = nid[0] == 'E' ? Cluster::edge : Cluster::cloud;
      k.add_node({nid, c, Role::worker}, probe_factory(&seen, script));
    }
    k.start();
    for (int i = 0; i < 1000; ++i) {
      SimTime at = k.rand_range(0, 500);
      k.schedule(at, nodes[k.rand_range(0, 2)], note("m"));
    }
    k.run_until(2000);
    return k.trace().to_string();
  };
  std::string a = run_once(42);
  std::string b = run_once(42);
  std::string c = run_once(43);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(!a.empty());
}

TEST_CASE("self timers of a previous incarnation do not fire after a quick restart") {
  std::vector<Probe::Seen> seen;
  auto k = two_cluster_kernel(&seen);
  k->schedule(100, "EN-1", note("stale"), "EN-1", SimKernel::EventKind::self);
  k->run_until(10);
  k->crash_node("EN-1");
  k->run_until(20);
  k->restart_node("EN-1");
  k->run_until(200);
  CHECK(seen.empty());
}

TEST_CASE("trace events parse back to the same fields") {
  std::vector<Probe::Seen> seen;
  auto k = two_cluster_kernel(&seen);
  k->send("EN-1", "EN-2", note("x"));
  k->crash_node("CN-1");
  k->run_until(10);
  std::string text = k->trace().to_string();
  std::istringstream is(text);
  auto parsed = TraceLog::read(is);
  REQUIRE(parsed.size() == k->trace().events().size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].format() == k->trace().events()[i].format());
  }
}
