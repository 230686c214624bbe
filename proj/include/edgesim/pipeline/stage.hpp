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

#include <deque>
#include <functional>
#include <map>
#include <set>

#include "edgesim/sim/messages.hpp"

namespace edgesim {

/// Payload wrapper produced by the annotate transform. The body passes
/// through unmodified; the timestamp is the record's origin time so the
/// result is a pure function of the record.
struct AnnotatedPayload {
  std::string camera_id;
  std::string date;  // YYYY-MM-DD derived from the timestamp
  SimTime timestamp = 0;
  Bytes body;
};

std::string date_from_sim_time(SimTime t);
AnnotatedPayload annotate(const Bytes& body, const std::string& camera_id, SimTime now);
Bytes encode_annotated(const AnnotatedPayload& p);
AnnotatedPayload decode_annotated(const Bytes& payload);

/// Registered pure per-record functions: identity, annotate, filter_even_seq.
/// Returning nullopt drops the record. Identity fields are never touched.
using Transform = std::function<std::optional<Record>(const Record&)>;
const Transform& transform_by_name(const std::string& name);
bool transform_exists(const std::string& name);

/// Tracks which (producer_id, producer_seq) pairs a stage has already handed
/// to its transform: highest contiguous prefix plus a sparse set above it.
class DedupState {
 public:
  /// Returns true when the pair is new and records it.
  bool check_and_insert(const std::string& producer, std::uint64_t seq);
  bool seen(const std::string& producer, std::uint64_t seq) const;

  Bytes encode() const;
  static DedupState decode(const Bytes& b);

 private:
  struct PerProducer {
    std::uint64_t contiguous = 0;  // seqs [0, contiguous) all seen
    std::set<std::uint64_t> ahead;
  };
  std::map<std::string, PerProducer> seen_;
};

/// Hosts the stage instances placed on this node: sources draining their
/// outbox, consumers running fetch -> dedup -> transform -> append -> commit
/// steps (at-least-once; the offset commit comes last).
class StageHost {
 public:
  explicit StageHost(std::map<TopicId, Cluster> topic_directory)
      : topic_dir_(std::move(topic_directory)) {}

  void on_start(Runtime& rt);
  void apply_config(Runtime& rt, const ConfigPush& push);
  bool handle(Runtime& rt, const NodeId& from, const MessageBase& m);

  bool runs(const StageId& s) const { return instances_.count(s) != 0; }

 private:
  enum class Phase : std::uint8_t { idle, wait_offset, wait_fetch, wait_append, wait_commit };

  struct Instance {
    StageSpec spec;
    // source
    std::deque<Record> outbox;
    // consumer
    bool offset_known = false;
    std::uint64_t next_offset = 0;
    DedupState dedup;
    // in-flight step
    Phase phase = Phase::idle;
    std::uint64_t req_id = 0;
    SimTime issued = 0;
    std::uint32_t rot = 0;  // target rotation for retries
    std::vector<Record> staged_out;
    DedupState staged_dedup;  // merged into dedup only when the step commits
    std::uint64_t staged_next = 0;
    std::uint32_t staged_n = 0;
  };

  void on_tick(Runtime& rt);
  void on_generate(Runtime& rt, const GenerateCmd& m);
  void start_instance(Runtime& rt, const StageSpec& spec);
  void stop_instance(Runtime& rt, const StageId& id);
  void step(Runtime& rt, Instance& in);
  NodeId target_for(Runtime& rt, const TopicId& topic, std::uint32_t rot) const;
  void send_append(Runtime& rt, Instance& in, const TopicId& topic, std::vector<Record> recs);
  void persist_dedup(Runtime& rt, const Instance& in);

  bool on_append_resp(Runtime& rt, const ClientAppendResp& m);
  bool on_fetch_resp(Runtime& rt, const FetchResp& m);
  bool on_offset_fetch_resp(Runtime& rt, const OffsetFetchResp& m);
  bool on_offset_commit_resp(Runtime& rt, const OffsetCommitResp& m);
  Instance* instance_waiting(std::uint64_t req_id, Phase phase);

  std::map<StageId, Instance> instances_;
  std::map<TopicId, Cluster> topic_dir_;
  std::map<TopicId, NodeId> leader_hints_;
  std::uint64_t next_req_ = 1;
};

}  // namespace edgesim
