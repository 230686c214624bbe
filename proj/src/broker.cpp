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

#include "edgesim/log/broker.hpp"

#include <algorithm>

#include "edgesim/sim/bytes.hpp"

namespace edgesim {

namespace {

std::string key_log(const TopicId& t) { return "topic/" + t + "/log"; }
std::string key_commit(const TopicId& t) { return "topic/" + t + "/commit"; }
std::string key_offsets(const TopicId& t) { return "topic/" + t + "/offsets"; }
std::string key_epoch(const TopicId& t) { return "topic/" + t + "/epoch"; }

Bytes encode_u64(std::uint64_t v) {
  Bytes b;
  ByteWriter w(b);
  w.u64(v);
  return b;
}

std::uint64_t decode_u64(const Bytes& b) { return ByteReader(b).u64(); }

// k-th largest over (self value + follower map values): the value known
// durable on at least k members of the replica set.
std::uint64_t kth_largest(std::uint64_t self_value, const std::map<NodeId, std::uint64_t>& others,
                          const std::vector<NodeId>& members, const NodeId& self,
                          std::uint64_t k) {
  std::vector<std::uint64_t> vals;
  for (const auto& n : members) {
    if (n == self) {
      vals.push_back(self_value);
    } else {
      auto it = others.find(n);
      vals.push_back(it == others.end() ? 0 : it->second);
    }
  }
  std::sort(vals.begin(), vals.end(), std::greater<>());
  if (k == 0 || k > vals.size()) return 0;
  return vals[k - 1];
}

}  // namespace

void BrokerCore::on_start(Runtime& rt) {
  rt.schedule_self(rt.params().broker_tick, make_msg<BrokerTick>());
}

const ReplicaState* BrokerCore::replica(const TopicId& t) const {
  auto it = replicas_.find(t);
  return it == replicas_.end() ? nullptr : &it->second;
}

std::optional<NodeId> BrokerCore::leader_hint(const TopicId& t) const {
  auto it = cluster_topics_.find(t);
  if (it == cluster_topics_.end()) return std::nullopt;
  return it->second.leader;
}

ReplicaState& BrokerCore::ensure_loaded(Runtime& rt, const TopicId& t) {
  auto it = replicas_.find(t);
  if (it != replicas_.end()) return it->second;
  ReplicaState rs;
  auto& disk = rt.disk();
  if (const Bytes* b = disk.get(key_log(t))) rs.log = decode_records(*b);
  if (const Bytes* b = disk.get(key_commit(t))) rs.commit_count = decode_u64(*b);
  if (const Bytes* b = disk.get(key_offsets(t))) rs.offsets = decode_offsets(*b);
  if (const Bytes* b = disk.get(key_epoch(t))) rs.stored_leader_epoch = decode_u64(*b);
  return replicas_.emplace(t, std::move(rs)).first->second;
}

void BrokerCore::adopt_epoch(Runtime& rt, ReplicaState& rs, const TopicId& t,
                             std::uint64_t leader_epoch) {
  if (leader_epoch <= rs.stored_leader_epoch) return;
  // An unclean leader change may have replaced our uncommitted tail; drop it
  // and re-fetch from the new leader. The committed prefix never changes.
  if (rs.log.size() > rs.commit_count) {
    rs.log.resize(rs.commit_count);
    rt.disk().put(key_log(t), encode_records(rs.log));
    rt.trace("log_truncate", {{"topic", t}, {"len", std::to_string(rs.log.size())}});
  }
  rs.stored_leader_epoch = leader_epoch;
  rt.disk().put(key_epoch(t), encode_u64(leader_epoch));
}

void BrokerCore::become_leader(Runtime& rt, ReplicaState& rs, const TopicId& t) {
  rs.leading = true;
  rs.follower_len.clear();
  rs.follower_commit.clear();
  if (rs.view.leader_epoch > rs.stored_leader_epoch) {
    rs.stored_leader_epoch = rs.view.leader_epoch;
    rt.disk().put(key_epoch(t), encode_u64(rs.view.leader_epoch));
  }
  bool dirty_commit = false;
  if (rs.view.baseline_commit > rs.commit_count) {
    // Promotion baseline from the manager's survey; our log is at least this
    // long (the survey picked the longest durable log).
    rs.commit_count = std::min<std::uint64_t>(rs.view.baseline_commit, rs.log.size());
    dirty_commit = true;
  }
  if (dirty_commit) {
    persist_commit(rt, rs, t);
    rt.trace("commit_advance", {{"topic", t}, {"commit", std::to_string(rs.commit_count)}});
  }
  bool dirty_offsets = false;
  for (const auto& [g, o] : rs.view.merged_offsets) {
    auto it = rs.offsets.find(g);
    if (it == rs.offsets.end() || it->second < o) {
      rs.offsets[g] = o;
      dirty_offsets = true;
    }
  }
  if (dirty_offsets) persist_offsets(rt, rs, t);
  rt.trace("broker_leader", {{"topic", t}, {"epoch", std::to_string(rs.view.leader_epoch)}});
}

void BrokerCore::apply_config(Runtime& rt, const ConfigPush& push) {
  for (const auto& tv : push.topics) {
    cluster_topics_[tv.id] = tv;
    bool mine = std::find(tv.replicas.begin(), tv.replicas.end(), rt.self()) != tv.replicas.end();
    if (!mine) continue;
    ReplicaState& rs = ensure_loaded(rt, tv.id);
    if (!rt.disk().has(key_log(tv.id))) rt.disk().put(key_log(tv.id), {});  // empty log, durable
    bool was_leading_epoch = rs.has_view && rs.leading && rs.view.leader_epoch == tv.leader_epoch;
    rs.view = tv;
    rs.has_view = true;
    if (tv.leader && *tv.leader == rt.self()) {
      if (!was_leading_epoch) become_leader(rt, rs, tv.id);
    } else {
      rs.leading = false;
      rs.pending_appends.clear();
      rs.pending_offsets.clear();
      adopt_epoch(rt, rs, tv.id, tv.leader_epoch);
    }
  }
}

void BrokerCore::append_durable(Runtime& rt, ReplicaState& rs, const TopicId& t,
                                const std::vector<Record>& recs, const std::string& client) {
  Bytes frame = encode_records(recs);
  rt.disk().append(key_log(t), frame);
  for (const auto& r : recs) {
    Detail d{{"topic", t},
             {"offset", std::to_string(rs.log.size())},
             {"producer", r.producer_id},
             {"pseq", std::to_string(r.producer_seq)}};
    if (!client.empty()) d.emplace_back("client", client);
    rt.trace("durable_write", std::move(d));
    rs.log.push_back(r);
  }
}

void BrokerCore::persist_commit(Runtime& rt, ReplicaState& rs, const TopicId& t) {
  rt.disk().put(key_commit(t), encode_u64(rs.commit_count));
}

void BrokerCore::persist_offsets(Runtime& rt, ReplicaState& rs, const TopicId& t) {
  rt.disk().put(key_offsets(t), encode_offsets(rs.offsets));
}

void BrokerCore::replicate_to(Runtime& rt, ReplicaState& rs, const TopicId& t,
                              const NodeId& follower) {
  auto known = rs.follower_len.find(follower);
  auto msg = std::make_shared<ReplicateReq>();
  msg->topic = t;
  msg->leader_epoch = rs.view.leader_epoch;
  msg->commit_count = rs.commit_count;
  if (known == rs.follower_len.end()) {
    // Probe: learn the follower's durable length before shipping records.
    msg->base_offset = rs.log.size();
  } else {
    std::uint64_t from = known->second;
    std::uint64_t to = std::min<std::uint64_t>(rs.log.size(),
                                               from + rt.params().replication_window);
    msg->base_offset = from;
    msg->records.assign(rs.log.begin() + static_cast<std::ptrdiff_t>(from),
                        rs.log.begin() + static_cast<std::ptrdiff_t>(to));
  }
  rt.send(follower, msg);
}

void BrokerCore::try_advance(Runtime& rt, ReplicaState& rs, const TopicId& t) {
  if (!rs.leading) return;
  std::uint64_t q = quorum(rs.view.replicas.size());
  std::uint64_t durable_majority =
      kth_largest(rs.log.size(), rs.follower_len, rs.view.replicas, rt.self(), q);
  if (durable_majority > rs.commit_count) {
    rs.commit_count = durable_majority;
    persist_commit(rt, rs, t);
    rt.trace("commit_advance", {{"topic", t}, {"commit", std::to_string(rs.commit_count)}});
    // Let followers persist the new commit index; acks feed follower_commit.
    for (const auto& n : rs.view.replicas) {
      if (n != rt.self()) replicate_to(rt, rs, t, n);
    }
  }
  std::uint64_t commit_majority =
      kth_largest(rs.commit_count, rs.follower_commit, rs.view.replicas, rt.self(), q);
  while (!rs.pending_appends.empty()) {
    const auto& p = rs.pending_appends.front();
    // Acked only when a majority holds the records and a covering commit
    // index durably, so promotion can never lose an acked record.
    if (p.end > rs.commit_count || p.end > commit_majority) break;
    for (std::uint64_t o = p.base; o < p.end; ++o) {
      const Record& r = rs.log[o];
      rt.trace("append_ack", {{"topic", t},
                              {"offset", std::to_string(o)},
                              {"producer", r.producer_id},
                              {"pseq", std::to_string(r.producer_seq)},
                              {"client", p.client}});
    }
    auto resp = std::make_shared<ClientAppendResp>();
    resp->topic = t;
    resp->req_id = p.req_id;
    resp->status = RpcStatus::ok;
    resp->base_offset = p.base;
    rt.send(p.client_node, resp);
    rs.pending_appends.pop_front();
  }
  for (auto it = rs.pending_offsets.begin(); it != rs.pending_offsets.end();) {
    if (it->acks.size() + 1 >= q) {
      auto resp = std::make_shared<OffsetCommitResp>();
      resp->topic = t;
      resp->req_id = it->req_id;
      resp->status = RpcStatus::ok;
      rt.send(it->client_node, resp);
      it = rs.pending_offsets.erase(it);
    } else {
      ++it;
    }
  }
}

void BrokerCore::on_client_append(Runtime& rt, const NodeId& from, const ClientAppendReq& m) {
  auto resp = std::make_shared<ClientAppendResp>();
  resp->topic = m.topic;
  resp->req_id = m.req_id;
  auto it = replicas_.find(m.topic);
  if (it == replicas_.end() || !it->second.has_view || !it->second.leading) {
    auto hint = leader_hint(m.topic);
    if (hint && *hint != rt.self()) {
      resp->status = RpcStatus::redirect;
      resp->leader_hint = *hint;
    } else {
      resp->status = RpcStatus::no_leader;
    }
    rt.send(from, resp);
    return;
  }
  ReplicaState& rs = it->second;
  std::uint64_t base = rs.log.size();
  append_durable(rt, rs, m.topic, m.records, m.client);
  rs.pending_appends.push_back(
      {from, m.client, m.req_id, base, base + m.records.size()});
  for (const auto& n : rs.view.replicas) {
    if (n != rt.self() && rs.follower_len.count(n)) replicate_to(rt, rs, m.topic, n);
  }
  try_advance(rt, rs, m.topic);  // rf=1 commits immediately
}

void BrokerCore::on_fetch(Runtime& rt, const NodeId& from, const FetchReq& m) {
  auto resp = std::make_shared<FetchResp>();
  resp->topic = m.topic;
  resp->req_id = m.req_id;
  resp->from = m.from;
  auto it = replicas_.find(m.topic);
  if (it == replicas_.end() || !it->second.has_view) {
    auto hint = leader_hint(m.topic);
    if (hint && *hint != rt.self()) {
      resp->status = RpcStatus::redirect;
      resp->leader_hint = *hint;
    } else {
      resp->status = RpcStatus::no_leader;
    }
    rt.send(from, resp);
    return;
  }
  const ReplicaState& rs = it->second;
  resp->status = RpcStatus::ok;
  resp->commit_count = rs.commit_count;
  if (m.from < rs.commit_count) {
    std::uint64_t to = std::min<std::uint64_t>(rs.commit_count, m.from + m.max);
    resp->records.assign(rs.log.begin() + static_cast<std::ptrdiff_t>(m.from),
                         rs.log.begin() + static_cast<std::ptrdiff_t>(to));
  }
  rt.send(from, resp);
}

void BrokerCore::on_offset_commit(Runtime& rt, const NodeId& from, const OffsetCommitReq& m) {
  auto resp = std::make_shared<OffsetCommitResp>();
  resp->topic = m.topic;
  resp->req_id = m.req_id;
  auto it = replicas_.find(m.topic);
  if (it == replicas_.end() || !it->second.leading) {
    auto hint = leader_hint(m.topic);
    if (hint && *hint != rt.self()) {
      resp->status = RpcStatus::redirect;
      resp->leader_hint = *hint;
    } else {
      resp->status = RpcStatus::no_leader;
    }
    rt.send(from, resp);
    return;
  }
  ReplicaState& rs = it->second;
  auto cur = rs.offsets.find(m.group);
  std::uint64_t current = cur == rs.offsets.end() ? 0 : cur->second;
  if (m.offset > rs.commit_count || m.offset < current) {
    resp->status = RpcStatus::rejected;  // beyond commit, or regressing
    rt.send(from, resp);
    return;
  }
  if (m.offset == current) {
    resp->status = RpcStatus::ok;
    rt.send(from, resp);
    return;
  }
  rs.offsets[m.group] = m.offset;
  persist_offsets(rt, rs, m.topic);
  rt.trace("offset_commit", {{"topic", m.topic}, {"group", m.group},
                             {"offset", std::to_string(m.offset)}});
  rs.pending_offsets.push_back({from, m.req_id, m.group, m.offset, {}});
  for (const auto& n : rs.view.replicas) {
    if (n == rt.self()) continue;
    auto rep = std::make_shared<OffsetReplicate>();
    rep->topic = m.topic;
    rep->leader_epoch = rs.view.leader_epoch;
    rep->group = m.group;
    rep->offset = m.offset;
    rt.send(n, rep);
  }
  try_advance(rt, rs, m.topic);
}

void BrokerCore::on_offset_fetch(Runtime& rt, const NodeId& from, const OffsetFetchReq& m) {
  auto resp = std::make_shared<OffsetFetchResp>();
  resp->topic = m.topic;
  resp->req_id = m.req_id;
  auto it = replicas_.find(m.topic);
  if (it == replicas_.end() || !it->second.has_view) {
    auto hint = leader_hint(m.topic);
    if (hint && *hint != rt.self()) {
      resp->status = RpcStatus::redirect;
      resp->leader_hint = *hint;
    } else {
      resp->status = RpcStatus::no_leader;
    }
    rt.send(from, resp);
    return;
  }
  const ReplicaState& rs = it->second;
  resp->status = RpcStatus::ok;
  auto g = rs.offsets.find(m.group);
  resp->offset = g == rs.offsets.end() ? 0 : g->second;
  rt.send(from, resp);
}

void BrokerCore::on_replicate(Runtime& rt, const NodeId& from, const ReplicateReq& m) {
  ReplicaState& rs = ensure_loaded(rt, m.topic);
  if (m.leader_epoch < rs.stored_leader_epoch) return;  // stale leader
  adopt_epoch(rt, rs, m.topic, m.leader_epoch);
  if (m.base_offset <= rs.log.size() && m.base_offset + m.records.size() > rs.log.size()) {
    std::size_t skip = rs.log.size() - m.base_offset;
    std::vector<Record> tail(m.records.begin() + static_cast<std::ptrdiff_t>(skip),
                             m.records.end());
    append_durable(rt, rs, m.topic, tail, "");
  }
  std::uint64_t newc = std::min<std::uint64_t>(m.commit_count, rs.log.size());
  if (newc > rs.commit_count) {
    rs.commit_count = newc;
    persist_commit(rt, rs, m.topic);
  }
  auto ack = std::make_shared<ReplicateAck>();
  ack->topic = m.topic;
  ack->leader_epoch = m.leader_epoch;
  ack->durable_len = rs.log.size();
  ack->durable_commit = rs.commit_count;
  rt.send(from, ack);
}

void BrokerCore::on_replicate_ack(Runtime& rt, const NodeId& from, const ReplicateAck& m) {
  auto it = replicas_.find(m.topic);
  if (it == replicas_.end() || !it->second.leading) return;
  ReplicaState& rs = it->second;
  if (m.leader_epoch != rs.view.leader_epoch) return;
  auto& len = rs.follower_len[from];
  len = std::max(len, m.durable_len);
  auto& cmt = rs.follower_commit[from];
  cmt = std::max(cmt, m.durable_commit);
  if (len < rs.log.size()) replicate_to(rt, rs, m.topic, from);
  try_advance(rt, rs, m.topic);
}

void BrokerCore::on_offset_replicate(Runtime& rt, const NodeId& from, const OffsetReplicate& m) {
  ReplicaState& rs = ensure_loaded(rt, m.topic);
  if (m.leader_epoch < rs.stored_leader_epoch) return;
  adopt_epoch(rt, rs, m.topic, m.leader_epoch);
  auto& cur = rs.offsets[m.group];
  if (m.offset > cur) {
    cur = m.offset;
    persist_offsets(rt, rs, m.topic);
  }
  auto ack = std::make_shared<OffsetReplicateAck>();
  ack->topic = m.topic;
  ack->group = m.group;
  ack->offset = m.offset;
  rt.send(from, ack);
}

void BrokerCore::on_offset_replicate_ack(Runtime& rt, const NodeId& from,
                                         const OffsetReplicateAck& m) {
  auto it = replicas_.find(m.topic);
  if (it == replicas_.end() || !it->second.leading) return;
  ReplicaState& rs = it->second;
  for (auto& p : rs.pending_offsets) {
    if (p.group == m.group && p.offset == m.offset) p.acks.insert(from);
  }
  try_advance(rt, rs, m.topic);
}

void BrokerCore::on_status_query(Runtime& rt, const NodeId& from, const StatusQuery& m) {
  ReplicaState& rs = ensure_loaded(rt, m.topic);
  auto rep = std::make_shared<StatusReport>();
  rep->topic = m.topic;
  rep->durable_len = rs.log.size();
  rep->durable_commit = rs.commit_count;
  rep->offsets = rs.offsets;
  rt.send(from, rep);
}

void BrokerCore::on_tick(Runtime& rt) {
  for (auto& [t, rs] : replicas_) {
    if (!rs.leading || !rs.has_view) continue;
    for (const auto& n : rs.view.replicas) {
      if (n == rt.self()) continue;
      auto it = rs.follower_len.find(n);
      if (it == rs.follower_len.end() || it->second < rs.log.size()) {
        replicate_to(rt, rs, t, n);
      } else {
        auto c = rs.follower_commit.find(n);
        if (c == rs.follower_commit.end() || c->second < rs.commit_count)
          replicate_to(rt, rs, t, n);
      }
      // A caught-up replica outside the in-sync set is ready to join; the
      // manager commits the membership change.
      if (!rs.view.isr.count(n) && it != rs.follower_len.end() && it->second == rs.log.size()) {
        for (const auto& info : rt.directory()) {
          if (info.cluster == rt.self_info().cluster && info.role == Role::master) {
            auto notice = std::make_shared<IsrJoinReady>();
            notice->topic = t;
            notice->node = n;
            rt.send(info.id, notice);
          }
        }
      }
    }
    // Re-ship pending offset replications until the quorum acks.
    for (const auto& p : rs.pending_offsets) {
      for (const auto& n : rs.view.replicas) {
        if (n == rt.self() || p.acks.count(n)) continue;
        auto rep = std::make_shared<OffsetReplicate>();
        rep->topic = t;
        rep->leader_epoch = rs.view.leader_epoch;
        rep->group = p.group;
        rep->offset = p.offset;
        rt.send(n, rep);
      }
    }
  }
  rt.schedule_self(rt.params().broker_tick, make_msg<BrokerTick>());
}

bool BrokerCore::handle(Runtime& rt, const NodeId& from, const MessageBase& m) {
  if (dynamic_cast<const BrokerTick*>(&m)) {
    on_tick(rt);
    return true;
  }
  if (auto* p = dynamic_cast<const ClientAppendReq*>(&m)) {
    on_client_append(rt, from, *p);
    return true;
  }
  if (auto* p = dynamic_cast<const FetchReq*>(&m)) {
    on_fetch(rt, from, *p);
    return true;
  }
  if (auto* p = dynamic_cast<const OffsetCommitReq*>(&m)) {
    on_offset_commit(rt, from, *p);
    return true;
  }
  if (auto* p = dynamic_cast<const OffsetFetchReq*>(&m)) {
    on_offset_fetch(rt, from, *p);
    return true;
  }
  if (auto* p = dynamic_cast<const ReplicateReq*>(&m)) {
    on_replicate(rt, from, *p);
    return true;
  }
  if (auto* p = dynamic_cast<const ReplicateAck*>(&m)) {
    on_replicate_ack(rt, from, *p);
    return true;
  }
  if (auto* p = dynamic_cast<const OffsetReplicate*>(&m)) {
    on_offset_replicate(rt, from, *p);
    return true;
  }
  if (auto* p = dynamic_cast<const OffsetReplicateAck*>(&m)) {
    on_offset_replicate_ack(rt, from, *p);
    return true;
  }
  if (auto* p = dynamic_cast<const StatusQuery*>(&m)) {
    on_status_query(rt, from, *p);
    return true;
  }
  return false;
}

}  // namespace edgesim
