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

#include "edgesim/pipeline/stage.hpp"

#include <algorithm>

#include "edgesim/sim/bytes.hpp"

namespace edgesim {

namespace {

// Days between 1970-01-01 and 2018-01-01; sim time 0 maps to the latter.
constexpr std::int64_t kEpochDayBase = 17532;

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<int>(yr + (m <= 2));
}

}  // namespace

std::string date_from_sim_time(SimTime t) {
  std::int64_t days = kEpochDayBase + static_cast<std::int64_t>(t / 86400000ull);
  int y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
  return buf;
}

AnnotatedPayload annotate(const Bytes& body, const std::string& camera_id, SimTime now) {
  AnnotatedPayload p;
  p.camera_id = camera_id;
  p.date = date_from_sim_time(now);
  p.timestamp = now;
  p.body = body;
  return p;
}

Bytes encode_annotated(const AnnotatedPayload& p) {
  std::string header =
      "cam=" + p.camera_id + ";date=" + p.date + ";ts=" + std::to_string(p.timestamp) + ";";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), p.body.begin(), p.body.end());
  return out;
}

AnnotatedPayload decode_annotated(const Bytes& payload) {
  std::string s(payload.begin(), payload.end());
  AnnotatedPayload p;
  if (s.rfind("cam=", 0) != 0) throw std::invalid_argument("payload is not annotated");
  std::size_t d1 = s.find(';');
  std::size_t d2 = s.find(';', d1 + 1);
  std::size_t d3 = s.find(';', d2 + 1);
  if (d1 == std::string::npos || d2 == std::string::npos || d3 == std::string::npos)
    throw std::invalid_argument("payload is not annotated");
  p.camera_id = s.substr(4, d1 - 4);
  std::string date = s.substr(d1 + 1, d2 - d1 - 1);
  if (date.rfind("date=", 0) != 0) throw std::invalid_argument("payload is not annotated");
  p.date = date.substr(5);
  std::string ts = s.substr(d2 + 1, d3 - d2 - 1);
  if (ts.rfind("ts=", 0) != 0) throw std::invalid_argument("payload is not annotated");
  p.timestamp = std::stoull(ts.substr(3));
  p.body = Bytes(payload.begin() + static_cast<std::ptrdiff_t>(d3 + 1), payload.end());
  return p;
}

const Transform& transform_by_name(const std::string& name) {
  static const std::map<std::string, Transform> registry = {
      {"identity", [](const Record& r) -> std::optional<Record> { return r; }},
      {"annotate",
       [](const Record& r) -> std::optional<Record> {
         Record out = r;
         out.payload = encode_annotated(annotate(r.payload, r.producer_id, r.origin_time));
         return out;
       }},
      {"filter_even_seq",
       [](const Record& r) -> std::optional<Record> {
         if (r.producer_seq % 2 != 0) return std::nullopt;
         return r;
       }},
  };
  auto it = registry.find(name);
  if (it == registry.end()) throw std::invalid_argument("unknown transform: " + name);
  return it->second;
}

bool transform_exists(const std::string& name) {
  for (const char* n : {"identity", "annotate", "filter_even_seq"}) {
    if (name == n) return true;
  }
  return false;
}

bool DedupState::check_and_insert(const std::string& producer, std::uint64_t seq) {
  PerProducer& p = seen_[producer];
  if (seq < p.contiguous || p.ahead.count(seq)) return false;
  p.ahead.insert(seq);
  while (p.ahead.count(p.contiguous)) {
    p.ahead.erase(p.contiguous);
    p.contiguous++;
  }
  return true;
}

bool DedupState::seen(const std::string& producer, std::uint64_t seq) const {
  auto it = seen_.find(producer);
  if (it == seen_.end()) return false;
  return seq < it->second.contiguous || it->second.ahead.count(seq) != 0;
}

Bytes DedupState::encode() const {
  Bytes out;
  ByteWriter w(out);
  w.u32(static_cast<std::uint32_t>(seen_.size()));
  for (const auto& [prod, p] : seen_) {
    w.str16(prod);
    w.u64(p.contiguous);
    w.u32(static_cast<std::uint32_t>(p.ahead.size()));
    for (auto s : p.ahead) w.u64(s);
  }
  return out;
}

DedupState DedupState::decode(const Bytes& b) {
  DedupState d;
  ByteReader r(b);
  std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string prod = r.str16();
    PerProducer p;
    p.contiguous = r.u64();
    std::uint32_t k = r.u32();
    for (std::uint32_t j = 0; j < k; ++j) p.ahead.insert(r.u64());
    d.seen_[prod] = std::move(p);
  }
  return d;
}

// ---- StageHost ----

namespace {
std::string key_dedup(const std::string& group) { return "stage/" + group + "/dedup"; }
std::string key_seq(const std::string& producer) { return "producer/" + producer + "/next_seq"; }
}  // namespace

void StageHost::on_start(Runtime& rt) {
  rt.schedule_self(rt.params().stage_tick, make_msg<StageTick>());
}

void StageHost::start_instance(Runtime& rt, const StageSpec& spec) {
  Instance in;
  in.spec = spec;
  if (const Bytes* b = rt.disk().get(key_dedup(spec.group()))) in.dedup = DedupState::decode(*b);
  instances_[spec.id] = std::move(in);
  rt.trace("stage_start", {{"stage", spec.id}, {"gen", std::to_string(spec.generation)}});
}

void StageHost::stop_instance(Runtime& rt, const StageId& id) {
  instances_.erase(id);
  rt.trace("stage_stop", {{"stage", id}});
}

void StageHost::apply_config(Runtime& rt, const ConfigPush& push) {
  for (const auto& ts : push.topics) {
    if (ts.leader) leader_hints_[ts.id] = *ts.leader;
  }
  std::set<StageId> desired;
  for (const auto& ss : push.stages) {
    if (!ss.host || *ss.host != rt.self()) continue;
    desired.insert(ss.spec.id);
    auto it = instances_.find(ss.spec.id);
    if (it == instances_.end()) {
      start_instance(rt, ss.spec);
    } else if (!(it->second.spec == ss.spec)) {
      stop_instance(rt, ss.spec.id);
      start_instance(rt, ss.spec);
    }
  }
  std::vector<StageId> gone;
  for (const auto& [id, in] : instances_) {
    if (!desired.count(id)) gone.push_back(id);
  }
  for (const auto& id : gone) stop_instance(rt, id);
}

NodeId StageHost::target_for(Runtime& rt, const TopicId& topic, std::uint32_t rot) const {
  auto hint = leader_hints_.find(topic);
  if (rot == 0 && hint != leader_hints_.end()) return hint->second;
  auto cl = topic_dir_.find(topic);
  std::vector<NodeId> candidates;
  for (const auto& n : rt.directory()) {
    if (cl == topic_dir_.end() || n.cluster == cl->second) candidates.push_back(n.id);
  }
  std::sort(candidates.begin(), candidates.end());
  if (candidates.empty()) return rt.self();
  return candidates[rot % candidates.size()];
}

void StageHost::send_append(Runtime& rt, Instance& in, const TopicId& topic,
                            std::vector<Record> recs) {
  auto msg = std::make_shared<ClientAppendReq>();
  msg->topic = topic;
  msg->client = in.spec.id;
  msg->req_id = in.req_id;
  msg->records = std::move(recs);
  rt.send(target_for(rt, topic, in.rot), msg);
}

void StageHost::persist_dedup(Runtime& rt, const Instance& in) {
  rt.disk().put(key_dedup(in.spec.group()), in.dedup.encode());
}

void StageHost::step(Runtime& rt, Instance& in) {
  if (in.phase != Phase::idle) return;
  const auto& p = rt.params();
  in.req_id = next_req_++;
  in.issued = rt.now();
  if (in.spec.kind == StageKind::source) {
    if (in.outbox.empty() || !in.spec.output) return;
    std::size_t n = std::min<std::size_t>(p.batch_size, in.outbox.size());
    std::vector<Record> batch(in.outbox.begin(),
                              in.outbox.begin() + static_cast<std::ptrdiff_t>(n));
    in.staged_n = static_cast<std::uint32_t>(n);
    in.phase = Phase::wait_append;
    send_append(rt, in, *in.spec.output, std::move(batch));
    return;
  }
  if (!in.spec.input) return;
  if (!in.offset_known) {
    auto msg = std::make_shared<OffsetFetchReq>();
    msg->topic = *in.spec.input;
    msg->group = in.spec.group();
    msg->req_id = in.req_id;
    in.phase = Phase::wait_offset;
    rt.send(target_for(rt, *in.spec.input, in.rot), msg);
    return;
  }
  auto msg = std::make_shared<FetchReq>();
  msg->topic = *in.spec.input;
  msg->req_id = in.req_id;
  msg->from = in.next_offset;
  msg->max = p.batch_size;
  in.phase = Phase::wait_fetch;
  rt.send(target_for(rt, *in.spec.input, in.rot), msg);
}

void StageHost::on_tick(Runtime& rt) {
  for (auto& [id, in] : instances_) {
    if (in.phase != Phase::idle && rt.now() - in.issued > rt.params().rpc_timeout) {
      // Abandon the step; re-fetching from the committed offset retries it.
      // Duplicates created by the retry are suppressed downstream.
      in.phase = Phase::idle;
      in.rot++;
      in.staged_out.clear();
    }
    step(rt, in);
  }
  rt.schedule_self(rt.params().stage_tick, make_msg<StageTick>());
}

void StageHost::on_generate(Runtime& rt, const GenerateCmd& m) {
  auto it = instances_.find(m.stage);
  if (it == instances_.end()) return;  // broadcast; only the host acts
  Instance& in = it->second;
  if (in.spec.kind != StageKind::source) return;
  std::string producer = "cam-" + rt.self();
  std::uint64_t seq = 0;
  if (const Bytes* b = rt.disk().get(key_seq(producer))) seq = ByteReader(*b).u64();
  const Transform& fn = transform_by_name(in.spec.transform_id);
  for (std::uint32_t i = 0; i < m.count; ++i) {
    std::string body = "img:" + producer + ":" + std::to_string(seq + i);
    Record r;
    r.producer_id = producer;
    r.producer_seq = seq + i;
    r.origin_time = rt.now();
    r.payload = Bytes(body.begin(), body.end());
    if (auto out = fn(r)) in.outbox.push_back(std::move(*out));
  }
  Bytes b;
  ByteWriter w(b);
  w.u64(seq + m.count);
  rt.disk().put(key_seq(producer), b);
  rt.trace("generate", {{"stage", m.stage},
                        {"count", std::to_string(m.count)},
                        {"producer", producer},
                        {"base_seq", std::to_string(seq)}});
  step(rt, in);
}

StageHost::Instance* StageHost::instance_waiting(std::uint64_t req_id, Phase phase) {
  for (auto& [id, in] : instances_) {
    if (in.phase == phase && in.req_id == req_id) return &in;
  }
  return nullptr;
}

bool StageHost::on_append_resp(Runtime& rt, const ClientAppendResp& m) {
  Instance* in = instance_waiting(m.req_id, Phase::wait_append);
  if (!in) return true;  // stale response
  if (m.status == RpcStatus::ok) {
    if (in->spec.kind == StageKind::source) {
      for (std::uint32_t i = 0; i < in->staged_n && !in->outbox.empty(); ++i)
        in->outbox.pop_front();
      rt.trace("stage_step", {{"stage", in->spec.id}, {"n", std::to_string(in->staged_n)}});
      in->phase = Phase::idle;
      in->rot = 0;
      step(rt, *in);
      return true;
    }
    auto msg = std::make_shared<OffsetCommitReq>();
    msg->topic = *in->spec.input;
    msg->group = in->spec.group();
    msg->req_id = in->req_id = next_req_++;
    msg->offset = in->staged_next;
    in->issued = rt.now();
    in->phase = Phase::wait_commit;
    rt.send(target_for(rt, *in->spec.input, 0), msg);
    return true;
  }
  if (m.status == RpcStatus::redirect && !m.leader_hint.empty()) {
    leader_hints_[m.topic] = m.leader_hint;
    in->rot = 0;
  } else {
    in->rot++;
  }
  in->phase = Phase::idle;
  in->staged_out.clear();
  return true;
}

bool StageHost::on_fetch_resp(Runtime& rt, const FetchResp& m) {
  Instance* in = instance_waiting(m.req_id, Phase::wait_fetch);
  if (!in) return true;
  if (m.status != RpcStatus::ok) {
    if (m.status == RpcStatus::redirect && !m.leader_hint.empty()) {
      leader_hints_[m.topic] = m.leader_hint;
      in->rot = 0;
    } else {
      in->rot++;
    }
    in->phase = Phase::idle;
    return true;
  }
  if (m.records.empty()) {
    in->phase = Phase::idle;  // caught up; poll again next tick
    return true;
  }
  in->staged_dedup = in->dedup;
  in->staged_out.clear();
  const Transform& fn = transform_by_name(in->spec.transform_id);
  for (const auto& r : m.records) {
    if (!in->staged_dedup.check_and_insert(r.producer_id, r.producer_seq)) continue;
    if (auto out = fn(r)) {
      if (in->spec.output) in->staged_out.push_back(std::move(*out));
    }
  }
  in->staged_next = m.from + m.records.size();
  in->staged_n = static_cast<std::uint32_t>(m.records.size());
  if (!in->staged_out.empty() && in->spec.output) {
    in->req_id = next_req_++;
    in->issued = rt.now();
    in->phase = Phase::wait_append;
    send_append(rt, *in, *in->spec.output, in->staged_out);
    return true;
  }
  auto msg = std::make_shared<OffsetCommitReq>();
  msg->topic = *in->spec.input;
  msg->group = in->spec.group();
  msg->req_id = in->req_id = next_req_++;
  msg->offset = in->staged_next;
  in->issued = rt.now();
  in->phase = Phase::wait_commit;
  rt.send(target_for(rt, *in->spec.input, 0), msg);
  return true;
}

bool StageHost::on_offset_fetch_resp(Runtime& rt, const OffsetFetchResp& m) {
  Instance* in = instance_waiting(m.req_id, Phase::wait_offset);
  if (!in) return true;
  if (m.status != RpcStatus::ok) {
    if (m.status == RpcStatus::redirect && !m.leader_hint.empty()) {
      leader_hints_[m.topic] = m.leader_hint;
      in->rot = 0;
    } else {
      in->rot++;
    }
    in->phase = Phase::idle;
    return true;
  }
  // A fresh group starts from the spec's configured offset (rewire rule).
  if (m.offset == 0 && in->spec.input_start_offset > 0)
    in->next_offset = in->spec.input_start_offset;
  else
    in->next_offset = m.offset;
  in->offset_known = true;
  rt.trace("stage_resume", {{"stage", in->spec.id},
                            {"topic", m.topic},
                            {"offset", std::to_string(in->next_offset)}});
  in->phase = Phase::idle;
  in->rot = 0;
  step(rt, *in);
  return true;
}

bool StageHost::on_offset_commit_resp(Runtime& rt, const OffsetCommitResp& m) {
  Instance* in = instance_waiting(m.req_id, Phase::wait_commit);
  if (!in) return true;
  if (m.status == RpcStatus::ok) {
    in->next_offset = in->staged_next;
    in->dedup = in->staged_dedup;
    persist_dedup(rt, *in);
    rt.trace("stage_step", {{"stage", in->spec.id}, {"n", std::to_string(in->staged_n)}});
    in->phase = Phase::idle;
    in->rot = 0;
    in->staged_out.clear();
    step(rt, *in);
    return true;
  }
  if (m.status == RpcStatus::rejected) {
    in->offset_known = false;  // re-learn the committed offset
  } else if (m.status == RpcStatus::redirect && !m.leader_hint.empty()) {
    leader_hints_[m.topic] = m.leader_hint;
    in->rot = 0;
  } else {
    in->rot++;
  }
  in->phase = Phase::idle;
  in->staged_out.clear();
  return true;
}

bool StageHost::handle(Runtime& rt, const NodeId& from, const MessageBase& m) {
  (void)from;
  if (dynamic_cast<const StageTick*>(&m)) {
    on_tick(rt);
    return true;
  }
  if (auto* p = dynamic_cast<const GenerateCmd*>(&m)) {
    on_generate(rt, *p);
    return true;
  }
  if (auto* p = dynamic_cast<const ClientAppendResp*>(&m)) return on_append_resp(rt, *p);
  if (auto* p = dynamic_cast<const FetchResp*>(&m)) return on_fetch_resp(rt, *p);
  if (auto* p = dynamic_cast<const OffsetFetchResp*>(&m)) return on_offset_fetch_resp(rt, *p);
  if (auto* p = dynamic_cast<const OffsetCommitResp*>(&m)) return on_offset_commit_resp(rt, *p);
  return false;
}

}  // namespace edgesim
