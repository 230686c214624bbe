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

#include "edgesim/check/checker.hpp"

#include <algorithm>
#include <filesystem>

namespace edgesim::check {

std::string report_line(const CheckResult& r) {
  return "check=" + r.name + " result=" + (r.passed ? "pass" : "fail") +
         " evidence=" + (r.evidence.empty() ? "-" : r.evidence);
}

RunArtifacts RunArtifacts::load(const std::string& trace_path, const std::string& dump_dir) {
  RunArtifacts art;
  try {
    art.trace = TraceLog::read_file(trace_path);
  } catch (const std::exception& e) {
    throw ParseFailure(std::string("trace: ") + e.what());
  }
  namespace fs = std::filesystem;
  if (!fs::is_directory(dump_dir)) throw ParseFailure("dump dir missing: " + dump_dir);
  for (const auto& entry : fs::directory_iterator(dump_dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name.size() < 5 || name.compare(name.size() - 4, 4, ".log") != 0) continue;
    std::string stem = name.substr(0, name.size() - 4);
    auto at = stem.find('@');
    if (at == std::string::npos) throw ParseFailure("bad dump file name: " + name);
    TopicId topic = stem.substr(0, at);
    NodeId node = stem.substr(at + 1);
    try {
      art.dumps[topic][node] = read_dump_file(entry.path().string());
    } catch (const std::exception& e) {
      throw ParseFailure("dump " + name + ": " + e.what());
    }
  }
  return art;
}

std::map<TopicId, std::uint64_t> final_commit_counts(const std::vector<TraceEvent>& trace) {
  std::map<TopicId, std::uint64_t> out;
  for (const auto& e : trace) {
    if (e.kind != "commit_advance") continue;
    std::uint64_t c = std::stoull(e.get("commit"));
    auto& cur = out[e.get("topic")];
    cur = std::max(cur, c);
  }
  return out;
}

std::vector<Record> committed_view(const RunArtifacts& art, const TopicId& topic) {
  std::uint64_t commit = 0;
  auto counts = final_commit_counts(art.trace);
  if (auto it = counts.find(topic); it != counts.end()) commit = it->second;
  auto dit = art.dumps.find(topic);
  if (dit == art.dumps.end()) {
    if (commit == 0) return {};
    throw ParseFailure("no dumps for topic " + topic);
  }
  const std::vector<Record>* base = nullptr;
  for (const auto& [node, recs] : dit->second) {
    if (recs.size() >= commit && (!base || recs.size() > base->size())) base = &recs;
  }
  if (!base) throw ParseFailure("no replica dump covers the committed prefix of " + topic);
  // Prefix consistency: all replicas agree on bytes below min(commit, len).
  for (const auto& [node, recs] : dit->second) {
    std::size_t upto = std::min<std::size_t>(commit, recs.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (!(recs[i] == (*base)[i]))
        throw ParseFailure("replica dumps of " + topic + " diverge inside committed prefix at " +
                           std::to_string(i) + " on " + node);
    }
  }
  return std::vector<Record>(base->begin(), base->begin() + static_cast<std::ptrdiff_t>(commit));
}

std::map<Identity, Bytes> dedup_view(const std::vector<Record>& records) {
  std::map<Identity, Bytes> out;
  for (const auto& r : records) {
    out.emplace(Identity{r.producer_id, r.producer_seq}, r.payload);
  }
  return out;
}

std::set<Identity> acked_identities(const std::vector<TraceEvent>& trace, const TopicId& topic,
                                    const std::set<std::string>* clients,
                                    std::optional<SimTime> before) {
  std::set<Identity> out;
  for (const auto& e : trace) {
    if (e.kind != "append_ack" || e.get("topic") != topic) continue;
    if (before && e.time >= *before) continue;
    if (clients && !clients->count(e.get("client"))) continue;
    out.insert(Identity{e.get("producer"), std::stoull(e.get("pseq"))});
  }
  return out;
}

std::set<NodeId> up_nodes_at_end(const std::vector<TraceEvent>& trace,
                                 const std::vector<NodeInfo>& nodes) {
  std::set<NodeId> up;
  for (const auto& n : nodes) up.insert(n.id);
  for (const auto& e : trace) {
    if (e.kind == "crash") up.erase(e.node);
    if (e.kind == "restart") up.insert(e.node);
  }
  return up;
}

CheckResult check_no_loss(const RunArtifacts& art, const Scenario& scenario) {
  CheckResult res;
  res.name = "no_loss";
  const StageSpec* sink = scenario.sink();
  if (!sink || !sink->input) {
    res.evidence = "misconfigured:no_sink_stage";
    return res;
  }
  std::set<std::string> sources;
  for (const auto& s : scenario.source_ids()) sources.insert(s);
  std::set<Identity> acked;
  for (const auto& st : scenario.pipeline) {
    if (st.kind == StageKind::source && st.output) {
      auto a = acked_identities(art.trace, *st.output, &sources);
      acked.insert(a.begin(), a.end());
    }
  }
  auto view = dedup_view(committed_view(art, *sink->input));
  std::size_t present = 0;
  for (const auto& id : acked) {
    if (view.count(id)) {
      present++;
    } else if (res.evidence.empty()) {
      res.evidence = "missing:" + id.str();
    }
  }
  res.passed = present == acked.size();
  if (res.passed)
    res.evidence = "ok:" + std::to_string(present) + "/" + std::to_string(acked.size());
  else
    res.evidence += "(" + std::to_string(present) + "/" + std::to_string(acked.size()) + ")";
  return res;
}

CheckResult check_equivalence(const std::vector<Record>& sink_a,
                              const std::vector<Record>& sink_b) {
  CheckResult res;
  res.name = "equivalence";
  auto va = dedup_view(sink_a);
  auto vb = dedup_view(sink_b);
  for (const auto& [id, payload] : va) {
    auto it = vb.find(id);
    if (it == vb.end()) {
      res.evidence = "only_in_a:" + id.str();
      return res;
    }
    if (it->second != payload) {
      res.evidence = "payload_differs:" + id.str();
      return res;
    }
  }
  for (const auto& [id, payload] : vb) {
    if (!va.count(id)) {
      res.evidence = "only_in_b:" + id.str();
      return res;
    }
  }
  res.passed = true;
  res.evidence = "equal:" + std::to_string(va.size());
  return res;
}

CheckResult check_order(const std::vector<Record>& sink_committed) {
  CheckResult res;
  res.name = "order";
  std::map<std::string, std::uint64_t> last;
  std::set<Identity> seen;
  for (std::size_t i = 0; i < sink_committed.size(); ++i) {
    const Record& r = sink_committed[i];
    if (!seen.insert(Identity{r.producer_id, r.producer_seq}).second) continue;  // dup copy
    auto it = last.find(r.producer_id);
    if (it != last.end() && r.producer_seq <= it->second) {
      res.evidence = "inversion:" + r.producer_id + "/" + std::to_string(r.producer_seq) +
                     "_at_offset_" + std::to_string(i);
      return res;
    }
    last[r.producer_id] = r.producer_seq;
  }
  res.passed = true;
  res.evidence = "producers:" + std::to_string(last.size());
  return res;
}

CheckResult check_reschedule(const RunArtifacts& art, const StageId& stage,
                             const NodeId& failed_node, SimTime bound) {
  CheckResult res;
  res.name = "reschedule";
  std::optional<SimTime> fail_commit;
  std::optional<NodeId> host_at_failure;
  std::optional<SimTime> replaced_at;
  std::optional<NodeId> new_host;
  std::map<NodeId, bool> crashed;
  NodeId current_host;
  for (const auto& e : art.trace) {
    if (e.kind == "crash") crashed[e.node] = true;
    if (e.kind == "restart") crashed[e.node] = false;
    if (e.kind == "stage_place" && e.get("stage") == stage) {
      const std::string& host = e.get("host");
      if (!fail_commit) {
        current_host = host == "pending" ? "" : host;
      } else if (!replaced_at && host != "pending" && host != failed_node && !crashed[host]) {
        replaced_at = e.time;
        new_host = host;
      }
    }
    if (e.kind == "node_status" && e.get("target") == failed_node &&
        e.get("status") == "failed" && !fail_commit) {
      fail_commit = e.time;
      host_at_failure = current_host;
    }
    if (e.kind == "stage_step" && replaced_at && e.node == *new_host &&
        e.get("stage") == stage && e.get("n") != "0") {
      if (*replaced_at <= *fail_commit + bound) {
        res.passed = true;
        res.evidence = "replaced_on:" + *new_host + "_at:" + std::to_string(*replaced_at) +
                       "_resumed_at:" + std::to_string(e.time);
      } else {
        res.evidence = "replaced_too_late:" + std::to_string(*replaced_at - *fail_commit) +
                       "ms_bound:" + std::to_string(bound);
      }
      return res;
    }
  }
  if (!fail_commit) {
    res.evidence = "misconfigured:node_" + failed_node + "_never_marked_failed";
  } else if (!host_at_failure || *host_at_failure != failed_node) {
    res.evidence = "misconfigured:stage_not_hosted_on_" + failed_node + "_at_failure";
  } else if (!replaced_at) {
    res.evidence = "never_replaced_within_trace";
  } else {
    res.evidence = "replaced_but_no_processing_observed";
  }
  return res;
}

CheckResult check_buffering(const RunArtifacts& art, const Scenario& scenario, SimTime from,
                            SimTime to) {
  CheckResult res;
  res.name = "buffering";
  const StageSpec* bridge = scenario.bridge();
  if (!bridge || !bridge->input || !bridge->output) {
    res.evidence = "misconfigured:no_bridge_stage";
    return res;
  }
  const TopicId& in_topic = *bridge->input;
  const TopicId& out_topic = *bridge->output;

  std::uint64_t writes_in_window = 0;
  std::uint64_t commit_advances_in_window = 0;
  std::uint64_t acked_in_window = 0;
  bool healed = false;
  for (const auto& e : art.trace) {
    bool inside = e.time >= from && e.time < to;
    if (inside && e.kind == "durable_write" && e.get("topic") == out_topic) writes_in_window++;
    if (inside && e.kind == "commit_advance" && e.get("topic") == in_topic)
      commit_advances_in_window++;
    if (inside && e.kind == "append_ack" && e.get("topic") == in_topic) acked_in_window++;
    if (e.kind == "partition" && e.get("state") == "off" && e.time >= to) healed = true;
    if (e.kind == "fault" && e.get("kind") == "heal" && e.time >= to) healed = true;
  }
  if (writes_in_window > 0) {
    res.evidence = "cloud_writes_in_window:" + std::to_string(writes_in_window);
    return res;
  }
  if (acked_in_window == 0) {
    res.passed = true;  // vacuous: no source traffic inside the window
    res.evidence = "vacuous:no_source_traffic_in_window";
    return res;
  }
  if (commit_advances_in_window == 0) {
    res.evidence = "edge_commit_stalled_in_window";
    return res;
  }
  std::string drain;
  if (!healed) {
    drain = "drain:not-evaluated";
  } else {
    auto acked = acked_identities(art.trace, in_topic);
    auto out_view = dedup_view(committed_view(art, out_topic));
    for (const auto& id : acked) {
      if (!out_view.count(id)) {
        res.evidence = "undrained:" + id.str();
        return res;
      }
    }
    drain = "drain:" + std::to_string(acked.size());
  }
  res.passed = true;
  res.evidence = "buffered:" + std::to_string(acked_in_window) + "," + drain;
  return res;
}

std::vector<CheckResult> run_scenario_checks(const RunArtifacts& art, const Scenario& scenario) {
  std::vector<CheckResult> out;
  for (const auto& c : scenario.checks) {
    try {
      if (c.name == "no_loss") {
        out.push_back(check_no_loss(art, scenario));
      } else if (c.name == "order") {
        const StageSpec* sink = scenario.sink();
        if (!sink || !sink->input) {
          out.push_back({"order", false, "misconfigured:no_sink_stage"});
        } else {
          out.push_back(check_order(committed_view(art, *sink->input)));
        }
      } else if (c.name == "reschedule") {
        out.push_back(check_reschedule(art, c.args.at("stage"), c.args.at("node"),
                                       std::stoull(c.args.at("bound"))));
      } else if (c.name == "buffering") {
        out.push_back(check_buffering(art, scenario, std::stoull(c.args.at("from")),
                                      std::stoull(c.args.at("to"))));
      } else {
        out.push_back({c.name, false, "unknown_check"});
      }
    } catch (const ParseFailure& e) {
      std::string ev = e.what();
      std::replace(ev.begin(), ev.end(), ' ', '_');
      out.push_back({c.name, false, "parse_failure:" + ev});
    }
  }
  return out;
}

}  // namespace edgesim::check
