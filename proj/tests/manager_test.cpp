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

#include "edgesim/sim/node_runtime.hpp"
#include "test_util.hpp"

using namespace edgesim;

namespace {

/// A cluster of masters and workers running the real stack, plus a probe
/// worker that can send proposals and record the replies.
struct MgrRig {
  MgrRig(int masters, int workers, ManagerDesired desired, std::uint64_t seed = 1,
         SimParams params = SimParams{})
      : kernel(seed, params) {
    for (int i = 1; i <= masters; ++i) master_ids.push_back("M-" + std::to_string(i));
    for (int i = 1; i <= workers; ++i) worker_ids.push_back("W-" + std::to_string(i));
    for (const auto& m : master_ids) {
      kernel.add_node({m, Cluster::edge, Role::master}, [desired] {
        return std::make_unique<NodeRuntime>(true, desired, std::map<TopicId, Cluster>{});
      });
    }
    for (const auto& w : worker_ids) {
      kernel.add_node({w, Cluster::edge, Role::worker}, [] {
        return std::make_unique<NodeRuntime>(false, ManagerDesired{},
                                             std::map<TopicId, Cluster>{});
      });
    }
    kernel.add_node({"probe", Cluster::edge, Role::worker},
                    [this] { return std::make_unique<ProbeProc>(this); });
    kernel.start();
  }

  struct ProbeProc : Process {
    explicit ProbeProc(MgrRig* rig) : rig_(rig) {}
    void on_start(Runtime&) override {}
    void on_message(Runtime&, const NodeId&, const MessageBase& m) override {
      if (auto* p = dynamic_cast<const ProposeResp*>(&m)) rig_->propose_resps.push_back(*p);
    }
    MgrRig* rig_;
  };

  const ManagerCore* manager_of(const NodeId& n) {
    auto* r = dynamic_cast<NodeRuntime*>(kernel.process_of(n));
    return r ? r->manager() : nullptr;
  }

  std::optional<NodeId> leader() {
    for (const auto& m : master_ids) {
      const ManagerCore* mc = manager_of(m);
      if (mc && mc->role() == ManagerCore::MgrRole::leader) return m;
    }
    return std::nullopt;
  }

  std::optional<NodeId> wait_leader(SimTime deadline) {
    while (kernel.now() < deadline) {
      if (auto l = leader()) return l;
      kernel.run_until(kernel.now() + 10);
    }
    return leader();
  }

  void run(SimTime dt) { kernel.run_until(kernel.now() + dt); }

  std::uint64_t propose(const NodeId& to, const ConfigCommand& cmd) {
    auto msg = std::make_shared<ProposeReq>();
    msg->cmd = cmd;
    msg->req_id = ++req;
    kernel.schedule(kernel.now(), to, msg, "probe", SimKernel::EventKind::world);
    return req;
  }

  const ProposeResp* resp(std::uint64_t id) {
    for (const auto& r : propose_resps) {
      if (r.req_id == id) return &r;
    }
    return nullptr;
  }

  SimKernel kernel;
  std::vector<NodeId> master_ids;
  std::vector<NodeId> worker_ids;
  std::vector<ProposeResp> propose_resps;
  std::uint64_t req = 0;
};

std::vector<TraceEvent> events_of_kind(const SimKernel& k, const std::string& kind) {
  std::vector<TraceEvent> out;
  for (const auto& e : k.trace().events()) {
    if (e.kind == kind) out.push_back(e);
  }
  return out;
}

}  // namespace

TEST_CASE("three masters elect exactly one leader per term") {
  MgrRig rig(3, 0, {});
  auto l = rig.wait_leader(2000);
  REQUIRE(l.has_value());
  int leaders = 0;
  std::uint64_t top_term = 0;
  for (const auto& m : rig.master_ids) {
    const ManagerCore* mc = rig.manager_of(m);
    if (mc && mc->role() == ManagerCore::MgrRole::leader) {
      leaders++;
      top_term = std::max(top_term, mc->term());
    }
  }
  CHECK(leaders == 1);
  CHECK(top_term >= 1);
  rig.run(500);
  CHECK(!events_of_kind(rig.kernel, "config_commit").empty());
}

TEST_CASE("leader crash yields a successor with a higher term within three timeout rounds") {
  MgrRig rig(3, 0, {});
  auto l = rig.wait_leader(2000);
  REQUIRE(l.has_value());
  rig.run(200);
  std::uint64_t old_term = rig.manager_of(*l)->term();
  SimTime crash_at = rig.kernel.now();
  rig.kernel.crash_node(*l);
  rig.run(3 * 300 + 100);
  auto nl = rig.leader();
  REQUIRE(nl.has_value());
  CHECK(*nl != *l);
  CHECK(rig.manager_of(*nl)->term() > old_term);
  bool committed_after = false;
  for (const auto& e : events_of_kind(rig.kernel, "config_commit")) {
    if (e.time > crash_at) committed_after = true;
  }
  CHECK(committed_after);
}

TEST_CASE("two of three masters down means no new leader and no quorum for proposals") {
  MgrRig rig(3, 0, {});
  auto l = rig.wait_leader(2000);
  REQUIRE(l.has_value());
  rig.run(200);
  for (const auto& m : rig.master_ids) {
    if (m != *l) rig.kernel.crash_node(m);
  }
  rig.run(600);  // let contact records go stale past suspect_timeout
  std::uint64_t epochs_before = rig.manager_of(*l)->applied_epoch();
  auto id = rig.propose(*l, PlaceStageCmd{"PC-1", "W-1"});
  rig.run(800);
  const ProposeResp* r = rig.resp(id);
  REQUIRE(r != nullptr);
  CHECK(r->status == ProposeStatus::no_quorum);
  CHECK(rig.manager_of(*l)->applied_epoch() == epochs_before);
}

TEST_CASE("simultaneous candidacy resolves to a single winner across seeds 1..100") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    MgrRig rig(3, 0, {}, seed);
    auto l = rig.wait_leader(2000);
    REQUIRE(l.has_value());
    rig.run(100);
    SimTime crash_at = rig.kernel.now();
    rig.kernel.crash_node(*l);
    rig.run(3 * 300 + 100);
    int leaders = 0;
    for (const auto& m : rig.master_ids) {
      const ManagerCore* mc = rig.manager_of(m);
      if (mc && mc->role() == ManagerCore::MgrRole::leader) leaders++;
    }
    CAPTURE(seed);
    REQUIRE(leaders == 1);
    bool elected_in_bound = false;
    for (const auto& e : events_of_kind(rig.kernel, "leader_elected")) {
      if (e.time > crash_at && e.time <= crash_at + 3 * 300) elected_in_bound = true;
    }
    REQUIRE(elected_in_bound);
  }
}

TEST_CASE("proposals are serialized identically on every master") {
  MgrRig rig(3, 2, {});
  auto l = rig.wait_leader(2000);
  REQUIRE(l.has_value());
  rig.run(300);
  StageSpec s1;
  s1.id = "PC-1";
  s1.kind = StageKind::sink;
  s1.input = "T";
  s1.affinity = Affinity::edge;
  StageSpec s2 = s1;
  s2.id = "PC-2";
  auto a = rig.propose(*l, CreateStageCmd{s1});
  auto b = rig.propose(*l, CreateStageCmd{s2});
  rig.run(500);
  const ProposeResp* ra = rig.resp(a);
  const ProposeResp* rb = rig.resp(b);
  REQUIRE(ra);
  REQUIRE(rb);
  CHECK(ra->status == ProposeStatus::ok);
  CHECK(rb->status == ProposeStatus::ok);
  CHECK(rb->epoch == ra->epoch + 1);

  // Config agreement: every master applied the same digest at each epoch.
  std::map<std::string, std::map<std::uint64_t, std::string>> applied;
  for (const auto& e : events_of_kind(rig.kernel, "config_apply")) {
    applied[e.node][std::stoull(e.get("epoch"))] = e.get("digest");
  }
  REQUIRE(applied.size() == 3);
  for (const auto& [node, seq] : applied) {
    for (const auto& [epoch, digest] : seq) {
      for (const auto& [node2, seq2] : applied) {
        auto it = seq2.find(epoch);
        if (it != seq2.end()) CHECK(it->second == digest);
      }
    }
  }
}

TEST_CASE("duplicate topic creation is rejected and leaves the epoch unchanged") {
  ManagerDesired desired;
  desired.topics.push_back({"T", 2, {}});
  MgrRig rig(1, 2, desired);
  auto l = rig.wait_leader(2000);
  REQUIRE(l.has_value());
  rig.run(500);  // bootstrap creates T
  std::uint64_t before = rig.manager_of(*l)->applied_epoch();
  REQUIRE(rig.manager_of(*l)->config().topics.count("T") == 1);
  auto id = rig.propose(*l, CreateTopicCmd{"T", 2, {"W-1", "W-2"}});
  rig.run(300);
  const ProposeResp* r = rig.resp(id);
  REQUIRE(r != nullptr);
  CHECK(r->status == ProposeStatus::invalid);
  CHECK(rig.manager_of(*l)->applied_epoch() == before);
}

TEST_CASE("silent node is suspected then failed; a heartbeat during suspicion recovers it") {
  MgrRig rig(3, 1, {});
  auto l = rig.wait_leader(2000);
  REQUIRE(l.has_value());
  rig.run(300);
  SimTime crash_at = rig.kernel.now();
  rig.kernel.crash_node("W-1");
  rig.run(700);  // past suspect_timeout (500), before fail_timeout (1000)
  rig.kernel.restart_node("W-1");
  rig.run(1500);
  std::vector<std::string> w1_status;
  for (const auto& e : events_of_kind(rig.kernel, "node_status")) {
    if (e.get("target") == "W-1" && e.time >= crash_at) w1_status.push_back(e.get("status"));
  }
  REQUIRE(w1_status.size() >= 2);
  CHECK(w1_status[0] == "suspected");
  CHECK(w1_status[1] == "up");
  for (const auto& s : w1_status) CHECK(s != "failed");
}

TEST_CASE("a crashed node is marked failed within the detection bound, across 20 seeds") {
  // Bound: fail_timeout + heartbeat_interval (detector cadence) + commit slack.
  const SimTime bound = 1000 + 100 + 50;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    MgrRig rig(3, 1, {}, seed);
    auto l = rig.wait_leader(2000);
    REQUIRE(l.has_value());
    rig.run(300);
    SimTime crash_at = rig.kernel.now();
    rig.kernel.crash_node("W-1");
    rig.run(bound + 200);
    std::optional<SimTime> failed_at;
    for (const auto& e : events_of_kind(rig.kernel, "node_status")) {
      if (e.get("target") == "W-1" && e.get("status") == "failed" && !failed_at)
        failed_at = e.time;
    }
    CAPTURE(seed);
    REQUIRE(failed_at.has_value());
    CHECK(*failed_at - crash_at <= bound);
  }
}

TEST_CASE("stage scheduling spreads load across workers with lowest-id tie-break") {
  ManagerDesired desired;
  for (const char* s : {"PC-1", "PC-2"}) {
    StageSpec spec;
    spec.id = s;
    spec.kind = StageKind::sink;
    spec.input = "T";
    spec.affinity = Affinity::edge;
    desired.stages.push_back(spec);
  }
  MgrRig rig(1, 2, desired);
  auto l = rig.wait_leader(2000);
  REQUIRE(l.has_value());
  rig.run(500);
  const ClusterConfig& cfg = rig.manager_of(*l)->config();
  REQUIRE(cfg.stages.count("PC-1"));
  REQUIRE(cfg.stages.count("PC-2"));
  // Brute-force oracle: stages placed in id order on the least-loaded up
  // worker, ties to the lowest node id.
  std::map<NodeId, int> load;
  std::vector<NodeId> expect;
  for (int i = 0; i < 2; ++i) {
    NodeId best;
    for (const auto& w : rig.worker_ids) {
      if (best.empty() || load[w] < load[best] || (load[w] == load[best] && w < best)) best = w;
    }
    load[best]++;
    expect.push_back(best);
  }
  CHECK(cfg.stages.at("PC-1").host == expect[0]);
  CHECK(cfg.stages.at("PC-2").host == expect[1]);
}

TEST_CASE("workers exhausted: the stage lands on a master") {
  ManagerDesired desired;
  StageSpec spec;
  spec.id = "PC-1";
  spec.kind = StageKind::sink;
  spec.input = "T";
  spec.affinity = Affinity::edge;
  desired.stages.push_back(spec);
  MgrRig rig(3, 1, desired);
  auto l = rig.wait_leader(2000);
  REQUIRE(l.has_value());
  rig.run(500);
  REQUIRE(rig.manager_of(*l)->config().stages.at("PC-1").host == NodeId("W-1"));
  rig.kernel.crash_node("W-1");
  rig.run(2500);
  l = rig.leader();
  REQUIRE(l.has_value());
  auto host = rig.manager_of(*l)->config().stages.at("PC-1").host;
  REQUIRE(host.has_value());
  CHECK(host->rfind("M-", 0) == 0);
}

TEST_CASE("single-replica topic with a dead leader is unavailable, recovers on restart") {
  ManagerDesired desired;
  desired.topics.push_back({"T", 1, {"W-1"}});
  MgrRig rig(1, 1, desired);
  auto l = rig.wait_leader(2000);
  REQUIRE(l.has_value());
  rig.run(500);
  rig.kernel.crash_node("W-1");
  rig.run(2500);
  CHECK(!events_of_kind(rig.kernel, "topic_unavailable").empty());
  CHECK(rig.manager_of(*l)->config().topics.at("T").isr.empty());

  rig.kernel.restart_node("W-1");
  rig.run(2000);
  const auto& cfg2 = rig.manager_of(*l)->config();
  REQUIRE(cfg2.topics.at("T").leader.has_value());
  CHECK(*cfg2.topics.at("T").leader == "W-1");
  CHECK(cfg2.topics.at("T").isr.count("W-1") == 1);
}
