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

// Scripted stand-in for the management plane: pushes hand-crafted topic
// views at the brokers and records every broker reply.
struct ClientLog {
  std::vector<ClientAppendResp> appends;
  std::vector<FetchResp> fetches;
  std::vector<OffsetCommitResp> offset_commits;
  std::vector<OffsetFetchResp> offset_fetches;
  std::vector<IsrJoinReady> joins;
};

class Director : public Process {
 public:
  explicit Director(ClientLog* log) : log_(log) {}
  void on_start(Runtime&) override {}
  void on_message(Runtime&, const NodeId&, const MessageBase& m) override {
    if (auto* p = dynamic_cast<const ClientAppendResp*>(&m)) log_->appends.push_back(*p);
    if (auto* p = dynamic_cast<const FetchResp*>(&m)) log_->fetches.push_back(*p);
    if (auto* p = dynamic_cast<const OffsetCommitResp*>(&m)) log_->offset_commits.push_back(*p);
    if (auto* p = dynamic_cast<const OffsetFetchResp*>(&m)) log_->offset_fetches.push_back(*p);
    if (auto* p = dynamic_cast<const IsrJoinReady*>(&m)) log_->joins.push_back(*p);
  }

 private:
  ClientLog* log_;
};

struct BrokerRig {
  explicit BrokerRig(std::uint64_t seed = 1) : kernel(seed, SimParams{}) {
    for (const char* b : {"B-1", "B-2", "B-3", "B-4"}) {
      kernel.add_node({b, Cluster::edge, Role::worker}, [] {
        return std::make_unique<NodeRuntime>(false, ManagerDesired{},
                                             std::map<TopicId, Cluster>{});
      });
    }
    // The director doubles as the cluster master so IsrJoinReady notices land here.
    kernel.add_node({"ctl", Cluster::edge, Role::master},
                    [this] { return std::make_unique<Director>(&log); });
    kernel.start();
  }

  TopicState view(std::vector<NodeId> replicas, const NodeId& leader, std::uint64_t leader_epoch,
                  std::vector<NodeId> isr, std::uint64_t baseline = 0,
                  std::map<std::string, std::uint64_t> merged = {}) {
    TopicState t;
    t.id = "T";
    t.replication_factor = 3;
    t.replicas = std::move(replicas);
    t.leader = leader;
    t.leader_epoch = leader_epoch;
    t.isr = std::set<NodeId>(isr.begin(), isr.end());
    t.baseline_commit = baseline;
    t.merged_offsets = std::move(merged);
    return t;
  }

  void push(const TopicState& t) {
    auto msg = std::make_shared<ConfigPush>();
    msg->epoch = ++epoch;
    msg->topics.push_back(t);
    for (const char* b : {"B-1", "B-2", "B-3", "B-4"}) {
      if (kernel.node_up(b)) kernel.schedule(kernel.now(), b, msg);
    }
  }

  std::uint64_t append(const NodeId& to, std::vector<Record> recs,
                       const std::string& client = "prod") {
    auto msg = std::make_shared<ClientAppendReq>();
    msg->topic = "T";
    msg->client = client;
    msg->req_id = ++req;
    msg->records = std::move(recs);
    kernel.schedule(kernel.now(), to, msg, "ctl", SimKernel::EventKind::world);
    return req;
  }

  std::uint64_t fetch(const NodeId& to, std::uint64_t from, std::uint32_t max) {
    auto msg = std::make_shared<FetchReq>();
    msg->topic = "T";
    msg->req_id = ++req;
    msg->from = from;
    msg->max = max;
    kernel.schedule(kernel.now(), to, msg, "ctl", SimKernel::EventKind::world);
    return req;
  }

  std::uint64_t commit_offset(const NodeId& to, const std::string& group, std::uint64_t off) {
    auto msg = std::make_shared<OffsetCommitReq>();
    msg->topic = "T";
    msg->group = group;
    msg->req_id = ++req;
    msg->offset = off;
    kernel.schedule(kernel.now(), to, msg, "ctl", SimKernel::EventKind::world);
    return req;
  }

  std::uint64_t fetch_offset(const NodeId& to, const std::string& group) {
    auto msg = std::make_shared<OffsetFetchReq>();
    msg->topic = "T";
    msg->group = group;
    msg->req_id = ++req;
    kernel.schedule(kernel.now(), to, msg, "ctl", SimKernel::EventKind::world);
    return req;
  }

  void settle(SimTime dt = 200) { kernel.run_until(kernel.now() + dt); }

  Record rec(const std::string& pid, std::uint64_t seq) {
    Record r;
    r.producer_id = pid;
    r.producer_seq = seq;
    r.origin_time = kernel.now();
    std::string body = pid + "#" + std::to_string(seq);
    r.payload = Bytes(body.begin(), body.end());
    return r;
  }

  const ClientAppendResp* append_resp(std::uint64_t id) {
    for (const auto& a : log.appends) {
      if (a.req_id == id) return &a;
    }
    return nullptr;
  }

  SimKernel kernel;
  ClientLog log;
  std::uint64_t epoch = 0;
  std::uint64_t req = 0;
};

}  // namespace

TEST_CASE("topic creation leaves an empty durable log on every replica") {
  BrokerRig rig;
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-1", 1, {"B-1", "B-2", "B-3"}));
  rig.settle();
  for (const char* b : {"B-1", "B-2", "B-3"}) {
    const Bytes* log = rig.kernel.disk_of(b).get("topic/T/log");
    REQUIRE(log != nullptr);
    CHECK(log->empty());
  }
  CHECK(rig.kernel.disk_of("B-4").get("topic/T/log") == nullptr);
}

TEST_CASE("single-replica topic accepts appends and serves fetches") {
  BrokerRig rig;
  auto t = rig.view({"B-1"}, "B-1", 1, {"B-1"});
  t.replication_factor = 1;
  rig.push(t);
  rig.settle();
  auto id = rig.append("B-1", {rig.rec("p", 0)});
  rig.settle();
  const auto* resp = rig.append_resp(id);
  REQUIRE(resp != nullptr);
  CHECK(resp->status == RpcStatus::ok);
  CHECK(resp->base_offset == 0);
}

TEST_CASE("append acks only after a second durable copy exists (majority of 3)") {
  BrokerRig rig;
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-1", 1, {"B-1", "B-2", "B-3"}));
  rig.settle();
  auto id = rig.append("B-1", {rig.rec("p", 0)});
  rig.settle();
  const auto* resp = rig.append_resp(id);
  REQUIRE(resp != nullptr);
  REQUIRE(resp->status == RpcStatus::ok);

  // Independent oracle: majority of 3 = floor(3/2)+1 = 2 durable copies of
  // offset 0 must be traced before the ack event.
  std::optional<SimTime> ack_time;
  std::size_t writes_before_ack = 0;
  bool leader_wrote = false;
  for (const auto& e : rig.kernel.trace().events()) {
    if (e.kind == "append_ack" && e.get("topic") == "T" && e.get("offset") == "0" && !ack_time)
      ack_time = e.time;
    if (e.kind == "durable_write" && e.get("topic") == "T" && e.get("offset") == "0" &&
        !ack_time) {
      writes_before_ack++;
      if (e.node == "B-1") leader_wrote = true;
    }
  }
  REQUIRE(ack_time.has_value());
  CHECK(writes_before_ack >= 2);
  CHECK(leader_wrote);
}

TEST_CASE("append pends while a majority of the replica set is crashed") {
  BrokerRig rig;
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-1", 1, {"B-1", "B-2", "B-3"}));
  rig.settle();
  rig.kernel.crash_node("B-2");
  rig.kernel.crash_node("B-3");
  auto id = rig.append("B-1", {rig.rec("p", 0)});
  rig.settle(2000);
  CHECK(rig.append_resp(id) == nullptr);  // not acknowledged
}

TEST_CASE("a producer's consecutive appends take consecutive offsets") {
  BrokerRig rig;
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-1", 1, {"B-1", "B-2", "B-3"}));
  rig.settle();
  auto a = rig.append("B-1", {rig.rec("p", 0)});
  rig.settle();
  auto b = rig.append("B-1", {rig.rec("p", 1)});
  rig.settle();
  REQUIRE(rig.append_resp(a));
  REQUIRE(rig.append_resp(b));
  CHECK(rig.append_resp(a)->base_offset == 0);
  CHECK(rig.append_resp(b)->base_offset == 1);
}

TEST_CASE("non-leader replicas redirect appends to the leader") {
  BrokerRig rig;
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-1", 1, {"B-1", "B-2", "B-3"}));
  rig.settle();
  auto id = rig.append("B-2", {rig.rec("p", 0)});
  rig.settle();
  const auto* resp = rig.append_resp(id);
  REQUIRE(resp != nullptr);
  CHECK(resp->status == RpcStatus::redirect);
  CHECK(resp->leader_hint == "B-1");
}

TEST_CASE("fetch returns the committed records and nothing past the commit index") {
  BrokerRig rig;
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-1", 1, {"B-1", "B-2", "B-3"}));
  rig.settle();
  for (int i = 0; i < 3; ++i) {
    rig.append("B-1", {rig.rec("p", static_cast<std::uint64_t>(i))});
    rig.settle();
  }
  auto f1 = rig.fetch("B-1", 0, 10);
  rig.settle();
  const FetchResp* r1 = nullptr;
  for (const auto& f : rig.log.fetches) {
    if (f.req_id == f1) r1 = &f;
  }
  REQUIRE(r1 != nullptr);
  REQUIRE(r1->records.size() == 3);
  for (std::uint64_t i = 0; i < 3; ++i) CHECK(r1->records[i].producer_seq == i);
  CHECK(r1->commit_count == 3);

  auto f2 = rig.fetch("B-1", r1->commit_count, 10);  // beyond the committed prefix
  rig.settle();
  for (const auto& f : rig.log.fetches) {
    if (f.req_id == f2) {
      CHECK(f.status == RpcStatus::ok);
      CHECK(f.records.empty());
    }
  }
}

TEST_CASE("followers serve the same committed bytes after the leader crashes") {
  BrokerRig rig;
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-1", 1, {"B-1", "B-2", "B-3"}));
  rig.settle();
  rig.append("B-1", {rig.rec("p", 0), rig.rec("p", 1)});
  rig.settle();
  auto f1 = rig.fetch("B-1", 0, 10);
  rig.settle();
  rig.kernel.crash_node("B-1");
  auto f2 = rig.fetch("B-2", 0, 10);
  rig.settle();
  const FetchResp *a = nullptr, *b = nullptr;
  for (const auto& f : rig.log.fetches) {
    if (f.req_id == f1) a = &f;
    if (f.req_id == f2) b = &f;
  }
  REQUIRE(a);
  REQUIRE(b);
  REQUIRE(a->records.size() == 2);
  REQUIRE(b->records.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(a->records[i] == b->records[i]);
}

TEST_CASE("consumer offsets: commit, read back, fresh group zero, regress rejected") {
  BrokerRig rig;
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-1", 1, {"B-1", "B-2", "B-3"}));
  rig.settle();
  for (int i = 0; i < 5; ++i) {
    rig.append("B-1", {rig.rec("p", static_cast<std::uint64_t>(i))});
    rig.settle();
  }
  auto c1 = rig.commit_offset("B-1", "g", 5);
  rig.settle();
  for (const auto& c : rig.log.offset_commits) {
    if (c.req_id == c1) CHECK(c.status == RpcStatus::ok);
  }
  auto q1 = rig.fetch_offset("B-1", "g");
  auto q2 = rig.fetch_offset("B-1", "fresh-group");
  rig.settle();
  for (const auto& o : rig.log.offset_fetches) {
    if (o.req_id == q1) CHECK(o.offset == 5);
    if (o.req_id == q2) CHECK(o.offset == 0);
  }
  auto c2 = rig.commit_offset("B-1", "g", 3);  // regress
  rig.settle();
  for (const auto& c : rig.log.offset_commits) {
    if (c.req_id == c2) CHECK(c.status == RpcStatus::rejected);
  }
  auto c3 = rig.commit_offset("B-1", "g", 99);  // beyond the commit index
  rig.settle();
  for (const auto& c : rig.log.offset_commits) {
    if (c.req_id == c3) CHECK(c.status == RpcStatus::rejected);
  }
}

TEST_CASE("promotion keeps every acked record; unacked tail may vanish") {
  BrokerRig rig;
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-1", 1, {"B-1", "B-2", "B-3"}));
  rig.settle();
  rig.append("B-1", {rig.rec("p", 0), rig.rec("p", 1)});
  rig.settle();  // both acked, commit propagated on ticks

  // Followers die; the next append lands durably only on the leader.
  rig.kernel.crash_node("B-2");
  rig.kernel.crash_node("B-3");
  auto unacked = rig.append("B-1", {rig.rec("p", 2)});
  rig.settle(300);
  CHECK(rig.append_resp(unacked) == nullptr);

  // Leader dies too; followers return and B-2 is promoted (directed).
  rig.kernel.crash_node("B-1");
  rig.kernel.restart_node("B-2");
  rig.kernel.restart_node("B-3");
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-2", 2, {"B-2", "B-3"}, /*baseline=*/2));
  rig.settle(300);

  auto f = rig.fetch("B-2", 0, 10);
  rig.settle();
  const FetchResp* r = nullptr;
  for (const auto& x : rig.log.fetches) {
    if (x.req_id == f) r = &x;
  }
  REQUIRE(r != nullptr);
  REQUIRE(r->records.size() == 2);  // acked survive, the unacked p/2 is gone
  CHECK(r->records[0].producer_seq == 0);
  CHECK(r->records[1].producer_seq == 1);
}

TEST_CASE("a restarted stale ex-leader truncates its unacked tail and converges") {
  BrokerRig rig;
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-1", 1, {"B-1", "B-2", "B-3"}));
  rig.settle();
  rig.append("B-1", {rig.rec("p", 0)});
  rig.settle();
  rig.kernel.crash_node("B-2");
  rig.kernel.crash_node("B-3");
  rig.append("B-1", {rig.rec("p", 1)});  // durable only on B-1, never acked
  rig.settle(300);
  rig.kernel.crash_node("B-1");
  rig.kernel.restart_node("B-2");
  rig.kernel.restart_node("B-3");
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-2", 2, {"B-2", "B-3"}, /*baseline=*/1));
  rig.settle(300);
  rig.append("B-2", {rig.rec("q", 0)});  // diverges from B-1's dead tail at offset 1
  rig.settle(300);

  rig.kernel.restart_node("B-1");
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-2", 2, {"B-2", "B-3"}));
  rig.settle(500);

  auto fa = rig.fetch("B-1", 0, 10);
  auto fb = rig.fetch("B-2", 0, 10);
  rig.settle();
  const FetchResp *a = nullptr, *b = nullptr;
  for (const auto& x : rig.log.fetches) {
    if (x.req_id == fa) a = &x;
    if (x.req_id == fb) b = &x;
  }
  REQUIRE(a);
  REQUIRE(b);
  REQUIRE(a->records.size() == b->records.size());
  for (std::size_t i = 0; i < a->records.size(); ++i) CHECK(a->records[i] == b->records[i]);
  CHECK(b->records.back().producer_id == "q");
}

TEST_CASE("a replica added after a failure catches up and reports in-sync readiness") {
  BrokerRig rig;
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-1", 1, {"B-1", "B-2", "B-3"}));
  rig.settle();
  for (int i = 0; i < 20; ++i) {
    rig.append("B-1", {rig.rec("p", static_cast<std::uint64_t>(i))});
  }
  rig.settle(500);
  rig.kernel.crash_node("B-3");
  // Manager's view after replica replacement: B-4 joins the set, not yet ISR.
  rig.push(rig.view({"B-1", "B-2", "B-4"}, "B-1", 2, {"B-1", "B-2"}));
  rig.settle(1000);

  // Catch-up transfer is visible as durable writes on the new replica.
  std::size_t b4_writes = 0;
  for (const auto& e : rig.kernel.trace().events()) {
    if (e.kind == "durable_write" && e.node == "B-4" && e.get("topic") == "T") b4_writes++;
  }
  CHECK(b4_writes == 20);
  REQUIRE(!rig.log.joins.empty());
  CHECK(rig.log.joins.front().topic == "T");
  CHECK(rig.log.joins.front().node == "B-4");
}

TEST_CASE("promotion survey offsets ride along: committed offsets survive leader loss") {
  BrokerRig rig;
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-1", 1, {"B-1", "B-2", "B-3"}));
  rig.settle();
  for (int i = 0; i < 4; ++i) {
    rig.append("B-1", {rig.rec("p", static_cast<std::uint64_t>(i))});
    rig.settle();
  }
  rig.commit_offset("B-1", "PC-2", 4);
  rig.settle(300);
  rig.kernel.crash_node("B-1");
  rig.push(rig.view({"B-1", "B-2", "B-3"}, "B-2", 2, {"B-2", "B-3"}, 4, {{"PC-2", 4}}));
  rig.settle(300);
  auto q = rig.fetch_offset("B-2", "PC-2");
  rig.settle();
  for (const auto& o : rig.log.offset_fetches) {
    if (o.req_id == q) {
      CHECK(o.status == RpcStatus::ok);
      CHECK(o.offset == 4);
    }
  }
}
