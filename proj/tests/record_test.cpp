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

#include "edgesim/cluster/config.hpp"
#include "edgesim/log/record.hpp"
#include "edgesim/sim/bytes.hpp"
#include "test_util.hpp"

using namespace edgesim;

namespace {
Record rec(const std::string& pid, std::uint64_t seq, const std::string& body,
           SimTime origin = 0) {
  Record r;
  r.producer_id = pid;
  r.producer_seq = seq;
  r.origin_time = origin;
  r.payload = Bytes(body.begin(), body.end());
  return r;
}
}  // namespace

TEST_CASE("log segment framing is byte-exact") {
  Record r = rec("cam-EN-2", 7, "abc", 1500);
  Bytes out;
  encode_record(out, r);
  // len(4) | pid_len(2) | pid(8) | seq(8) | origin(8) | payload(3)
  REQUIRE(out.size() == 4 + 2 + 8 + 8 + 8 + 3);
  ByteReader br(out);
  CHECK(br.u32() == 2 + 8 + 8 + 8 + 3);
  CHECK(br.u16() == 8);  // "cam-EN-2"
  (void)br.rawbytes(8);
  CHECK(br.u64() == 7);
  CHECK(br.u64() == 1500);
}

TEST_CASE("segment encode/decode round-trips record sequences") {
  std::vector<Record> rs = {rec("a", 0, ""), rec("a", 1, "x"), rec("bb", 0, "yyy", 42)};
  auto decoded = decode_records(encode_records(rs));
  CHECK(decoded == rs);
}

TEST_CASE("decode rejects truncated segments") {
  std::vector<Record> rs = {rec("a", 0, "payload")};
  Bytes blob = encode_records(rs);
  blob.pop_back();
  CHECK_THROWS(decode_records(blob));
}

TEST_CASE("dump files round-trip through the filesystem") {
  std::string dir = test::test_dir("record_dump");
  std::vector<Record> rs = {rec("cam-EN-1", 0, "i0", 10), rec("cam-EN-1", 1, "i1", 11)};
  write_dump_file(dir + "/T@N.log", rs);
  CHECK(read_dump_file(dir + "/T@N.log") == rs);
}

TEST_CASE("offset table codec round-trips") {
  std::map<std::string, std::uint64_t> offs = {{"PC-2", 17}, {"PC-3~1", 0}};
  CHECK(decode_offsets(encode_offsets(offs)) == offs);
}

TEST_CASE("config log framing carries epoch, term, kind and payload") {
  std::vector<ConfigLogEntry> log;
  log.push_back({0, 1, NoopCmd{}});
  log.push_back({1, 1, NodeStatusCmd{"EN-3", NodeStatus::failed}});
  log.push_back({2, 2, PlaceStageCmd{"PC-3", "EN-1"}});
  CreateTopicCmd ct;
  ct.topic = "ET-1";
  ct.replication_factor = 3;
  ct.replicas = {"EN-1", "EN-2", "EN-3"};
  log.push_back({3, 2, ct});
  TopicLeaderCmd tl;
  tl.topic = "ET-1";
  tl.leader = "EN-2";
  tl.isr = {"EN-1", "EN-2"};
  tl.baseline_commit = 41;
  tl.merged_offsets = {{"PC-3", 12}};
  log.push_back({4, 3, tl});

  Bytes blob = encode_config_log(log);
  // epoch(8) | term(8) | kind(1) | len(4) for the first (payload-free) entry
  ByteReader br(blob);
  CHECK(br.u64() == 1);  // slot 0 commits as epoch 1
  CHECK(br.u64() == 1);
  CHECK(br.u8() == 0);
  CHECK(br.u32() == 0);

  auto decoded = decode_config_log(blob);
  REQUIRE(decoded.size() == log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    CHECK(decoded[i].slot == log[i].slot);
    CHECK(decoded[i].term == log[i].term);
    CHECK(encode_command(decoded[i].cmd) == encode_command(log[i].cmd));
    CHECK(std::string(command_kind(decoded[i].cmd)) == command_kind(log[i].cmd));
  }
}

TEST_CASE("cluster config apply bumps the epoch by exactly one per command") {
  ClusterConfig cfg;
  cfg.membership["EN-1"] = {Role::worker, NodeStatus::up};
  cfg.membership["EN-2"] = {Role::worker, NodeStatus::up};
  CHECK(cfg.epoch == 0);
  cfg.apply(NoopCmd{});
  CHECK(cfg.epoch == 1);
  CreateTopicCmd ct;
  ct.topic = "ET-1";
  ct.replication_factor = 2;
  ct.replicas = {"EN-1", "EN-2"};
  cfg.apply(ct);
  CHECK(cfg.epoch == 2);
  REQUIRE(cfg.topics.count("ET-1"));
  CHECK(cfg.topics["ET-1"].leader == NodeId("EN-1"));
  CHECK(cfg.topics["ET-1"].isr.size() == 2);
  cfg.apply(NodeStatusCmd{"EN-1", NodeStatus::failed});
  CHECK(cfg.epoch == 3);
  CHECK(cfg.membership["EN-1"].status == NodeStatus::failed);
  TopicLeaderCmd tl;
  tl.topic = "ET-1";
  tl.leader = "EN-2";
  tl.isr = {"EN-2"};
  tl.baseline_commit = 5;
  cfg.apply(tl);
  CHECK(cfg.topics["ET-1"].leader == NodeId("EN-2"));
  CHECK(cfg.topics["ET-1"].leader_epoch == 4);
  cfg.apply(ReplicaRemoveCmd{"ET-1", "EN-1"});
  CHECK(cfg.topics["ET-1"].replicas == std::vector<NodeId>{"EN-2"});
}
