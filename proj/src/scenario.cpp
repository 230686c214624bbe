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

#include "edgesim/scenario/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "edgesim/pipeline/stage.hpp"

namespace edgesim {

const char* to_string(FaultEvent::Kind k) {
  switch (k) {
    case FaultEvent::Kind::crash: return "crash";
    case FaultEvent::Kind::restart: return "restart";
    case FaultEvent::Kind::partition: return "partition";
    case FaultEvent::Kind::heal: return "heal";
  }
  return "?";
}

std::map<TopicId, Cluster> Scenario::topic_directory() const {
  std::map<TopicId, Cluster> d;
  for (const auto& t : topics) d[t.id] = t.cluster;
  return d;
}

const StageSpec* Scenario::sink() const {
  for (const auto& s : pipeline) {
    if (s.kind == StageKind::sink) return &s;
  }
  return nullptr;
}

const StageSpec* Scenario::bridge() const {
  for (const auto& s : pipeline) {
    if (s.kind == StageKind::bridge) return &s;
  }
  return nullptr;
}

std::vector<StageId> Scenario::source_ids() const {
  std::vector<StageId> out;
  for (const auto& s : pipeline) {
    if (s.kind == StageKind::source) out.push_back(s.id);
  }
  return out;
}

ScenarioError::ScenarioError(std::vector<std::string> errs)
    : std::runtime_error(errs.empty() ? "scenario error"
                                      : errs.front() + (errs.size() > 1 ? " (+more)" : "")),
      errors(std::move(errs)) {}

namespace {

struct Parser {
  std::vector<std::string> errors;
  int line_no = 0;

  void err(const std::string& msg) { errors.push_back("line " + std::to_string(line_no) + ": " + msg); }

  static std::map<std::string, std::string> kv_pairs(const std::string& line) {
    std::map<std::string, std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got " + tok);
      out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
  }

  std::uint64_t num(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      err("missing " + key + "=");
      return 0;
    }
    try {
      return std::stoull(it->second);
    } catch (const std::exception&) {
      err("bad number for " + key + "=: " + it->second);
      return 0;
    }
  }

  std::string str(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      err("missing " + key + "=");
      return "";
    }
    return it->second;
  }
};

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto c = s.find(',', pos);
    if (c == std::string::npos) {
      if (pos < s.size()) out.push_back(s.substr(pos));
      break;
    }
    if (c > pos) out.push_back(s.substr(pos, c - pos));
    pos = c + 1;
  }
  return out;
}

void validate(Parser& p, Scenario& s) {
  std::set<NodeId> node_ids;
  std::map<TopicId, Cluster> topic_cluster;
  for (const auto& n : s.nodes) {
    if (!node_ids.insert(n.id).second) p.errors.push_back("duplicate node id " + n.id);
  }
  for (const auto& t : s.topics) {
    if (topic_cluster.count(t.id)) p.errors.push_back("duplicate topic id " + t.id);
    topic_cluster[t.id] = t.cluster;
    std::uint32_t cluster_size = 0;
    for (const auto& n : s.nodes) {
      if (n.cluster == t.cluster) cluster_size++;
    }
    if (t.replication_factor == 0) p.errors.push_back("topic " + t.id + ": rf must be positive");
    if (t.replication_factor > cluster_size)
      p.errors.push_back("topic " + t.id + ": rf exceeds cluster size");
    for (const auto& r : t.replicas) {
      if (!node_ids.count(r)) p.errors.push_back("topic " + t.id + ": unknown replica " + r);
    }
    if (!t.replicas.empty() && t.replicas.size() != t.replication_factor)
      p.errors.push_back("topic " + t.id + ": replicas list must match rf");
  }
  std::set<StageId> stage_ids;
  for (std::size_t i = 0; i < s.pipeline.size(); ++i) {
    const auto& st = s.pipeline[i];
    if (!stage_ids.insert(st.id).second) p.errors.push_back("duplicate stage id " + st.id);
    if (!transform_exists(st.transform_id))
      p.errors.push_back("stage " + st.id + ": unknown transform " + st.transform_id);
    if (st.kind == StageKind::source && st.input)
      p.errors.push_back("stage " + st.id + ": source has input");
    if (st.kind != StageKind::source && !st.input)
      p.errors.push_back("stage " + st.id + ": missing input topic");
    if (st.kind == StageKind::sink && st.output)
      p.errors.push_back("stage " + st.id + ": sink has output");
    if (st.kind != StageKind::sink && !st.output)
      p.errors.push_back("stage " + st.id + ": missing output topic");
    for (const auto& t : {st.input, st.output}) {
      if (t && !topic_cluster.count(*t))
        p.errors.push_back("stage " + st.id + ": unknown topic " + *t);
    }
    if (st.input && st.output && topic_cluster.count(*st.input) && topic_cluster.count(*st.output)) {
      bool cross = topic_cluster[*st.input] != topic_cluster[*st.output];
      if (cross && st.kind != StageKind::bridge)
        p.errors.push_back("stage " + st.id + ": topics cross clusters but kind is not bridge");
      if (!cross && st.kind == StageKind::bridge)
        p.errors.push_back("stage " + st.id + ": bridge topics must be in different clusters");
    }
  }
  // Linear chain: every source feeds the first topic; from there each stage's
  // output is the next stage's input.
  {
    std::optional<TopicId> first_topic;
    const StageSpec* prev = nullptr;
    for (const auto& st : s.pipeline) {
      if (st.kind == StageKind::source) {
        if (prev && prev->kind != StageKind::source)
          p.errors.push_back("source " + st.id + " appears after processing stages");
        if (st.output) {
          if (!first_topic) first_topic = st.output;
          if (*first_topic != *st.output)
            p.errors.push_back("sources feed different topics: " + st.id);
        }
      } else {
        if (st.input) {
          if (prev && prev->kind == StageKind::source) {
            if (first_topic && *st.input != *first_topic)
              p.errors.push_back("pipeline not a linear chain at " + st.id);
          } else if (prev && prev->output && *prev->output != *st.input) {
            p.errors.push_back("pipeline not a linear chain between " + prev->id + " and " +
                               st.id);
          }
        }
      }
      prev = &st;
    }
  }
  if (!s.pipeline.empty()) {
    if (s.pipeline.front().kind != StageKind::source)
      p.errors.push_back("pipeline must start with a source");
    if (s.pipeline.back().kind != StageKind::sink)
      p.errors.push_back("pipeline must end with a sink");
  }
  for (const auto& w : s.workload) {
    if (!stage_ids.count(w.stage)) p.errors.push_back("workload references unknown stage " + w.stage);
    if (w.time > s.run_until) p.errors.push_back("workload time beyond run_until");
  }
  std::set<NodeId> crashed;
  bool wan_partitioned = false;
  std::vector<const FaultEvent*> ordered;
  for (const auto& f : s.faults) ordered.push_back(&f);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const FaultEvent* a, const FaultEvent* b) { return a->time < b->time; });
  for (const auto* f : ordered) {
    if (f->time > s.run_until) p.errors.push_back("fault time beyond run_until");
    switch (f->kind) {
      case FaultEvent::Kind::crash:
        if (!node_ids.count(f->target)) p.errors.push_back("crash targets unknown node " + f->target);
        crashed.insert(f->target);
        break;
      case FaultEvent::Kind::restart:
        if (!crashed.count(f->target))
          p.errors.push_back("restart targets node not previously crashed: " + f->target);
        crashed.erase(f->target);
        break;
      case FaultEvent::Kind::partition:
        if (f->target != "wan" && f->target != "edge_lan" && f->target != "cloud_lan")
          p.errors.push_back("partition targets unknown domain " + f->target);
        if (f->target == "wan") wan_partitioned = true;
        break;
      case FaultEvent::Kind::heal:
        if (f->target == "wan" && !wan_partitioned)
          p.errors.push_back("heal targets a domain that is not partitioned: " + f->target);
        if (f->target == "wan") wan_partitioned = false;
        break;
    }
  }
  static const std::set<std::string> known_checks = {"no_loss", "order", "reschedule", "buffering"};
  for (const auto& c : s.checks) {
    if (!known_checks.count(c.name)) p.errors.push_back("unknown check " + c.name);
    if (c.name == "reschedule") {
      if (!c.args.count("stage") || !c.args.count("node") || !c.args.count("bound"))
        p.errors.push_back("reschedule check needs stage=, node=, bound=");
    }
    if (c.name == "buffering") {
      if (!c.args.count("from") || !c.args.count("to"))
        p.errors.push_back("buffering check needs from=, to=");
    }
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario s;
  Parser p;
  std::istringstream is(text);
  std::string line;
  std::string section;
  while (std::getline(is, line)) {
    p.line_no++;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);
    if (line.front() == '[') {
      if (line.back() != ']') {
        p.err("malformed section header");
        continue;
      }
      section = line.substr(1, line.size() - 2);
      static const std::set<std::string> known = {"nodes", "topics", "pipeline",
                                                  "workload", "faults", "checks"};
      if (!known.count(section)) p.err("unknown section [" + section + "]");
      continue;
    }
    std::map<std::string, std::string> kv;
    try {
      kv = Parser::kv_pairs(line);
    } catch (const std::exception& e) {
      p.err(e.what());
      continue;
    }
    if (section.empty()) {
      // scalar header fields and knob overrides
      for (const auto& [k, v] : kv) {
        try {
          if (k == "name") s.name = v;
          else if (k == "seed") s.seed = std::stoull(v);
          else if (k == "run_until") s.run_until = std::stoull(v);
          else if (k == "wan_latency") s.params.wan_latency = std::stoull(v);
          else if (k == "edge_latency") s.params.edge_lan_latency = std::stoull(v);
          else if (k == "cloud_latency") s.params.cloud_lan_latency = std::stoull(v);
          else if (k == "batch") s.params.batch_size = static_cast<std::uint32_t>(std::stoul(v));
          else if (k == "re_replication") s.params.re_replication = (v == "on" || v == "true");
          else p.err("unknown header key " + k);
        } catch (const std::exception&) {
          p.err("bad value for " + k + "=: " + v);
        }
      }
      continue;
    }
    if (section == "nodes") {
      NodeInfo n;
      n.id = p.str(kv, "id");
      std::string cl = p.str(kv, "cluster");
      if (cl == "edge") n.cluster = Cluster::edge;
      else if (cl == "cloud") n.cluster = Cluster::cloud;
      else p.err("bad cluster " + cl);
      std::string role = p.str(kv, "role");
      if (role == "master") n.role = Role::master;
      else if (role == "worker") n.role = Role::worker;
      else p.err("bad role " + role);
      s.nodes.push_back(std::move(n));
    } else if (section == "topics") {
      TopicDecl t;
      t.id = p.str(kv, "id");
      std::string cl = p.str(kv, "cluster");
      if (cl == "edge") t.cluster = Cluster::edge;
      else if (cl == "cloud") t.cluster = Cluster::cloud;
      else p.err("bad cluster " + cl);
      t.replication_factor = static_cast<std::uint32_t>(p.num(kv, "rf"));
      if (kv.count("replicas")) t.replicas = split_commas(kv.at("replicas"));
      s.topics.push_back(std::move(t));
    } else if (section == "pipeline") {
      StageSpec st;
      st.id = p.str(kv, "stage");
      std::string kind = p.str(kv, "kind");
      if (kind == "source") st.kind = StageKind::source;
      else if (kind == "transform") st.kind = StageKind::transform;
      else if (kind == "bridge") st.kind = StageKind::bridge;
      else if (kind == "sink") st.kind = StageKind::sink;
      else p.err("bad stage kind " + kind);
      if (kv.count("input")) st.input = kv.at("input");
      if (kv.count("output")) st.output = kv.at("output");
      std::string aff = p.str(kv, "affinity");
      if (aff == "edge") st.affinity = Affinity::edge;
      else if (aff == "cloud") st.affinity = Affinity::cloud;
      else if (aff == "any") st.affinity = Affinity::any;
      else p.err("bad affinity " + aff);
      if (kv.count("transform")) st.transform_id = kv.at("transform");
      s.pipeline.push_back(std::move(st));
    } else if (section == "workload") {
      WorkloadEvent w;
      w.time = p.num(kv, "time");
      w.stage = p.str(kv, "stage");
      w.count = static_cast<std::uint32_t>(p.num(kv, "count"));
      s.workload.push_back(std::move(w));
    } else if (section == "faults") {
      FaultEvent f;
      f.time = p.num(kv, "time");
      std::string kind = p.str(kv, "kind");
      if (kind == "crash") f.kind = FaultEvent::Kind::crash;
      else if (kind == "restart") f.kind = FaultEvent::Kind::restart;
      else if (kind == "partition") f.kind = FaultEvent::Kind::partition;
      else if (kind == "heal") f.kind = FaultEvent::Kind::heal;
      else p.err("bad fault kind " + kind);
      f.target = p.str(kv, "target");
      s.faults.push_back(std::move(f));
    } else if (section == "checks") {
      CheckDecl c;
      c.name = p.str(kv, "check");
      for (const auto& [k, v] : kv) {
        if (k != "check") c.args[k] = v;
      }
      s.checks.push_back(std::move(c));
    }
  }
  if (s.name.empty()) p.errors.push_back("missing name=");
  if (s.run_until == 0) p.errors.push_back("missing run_until=");
  if (s.nodes.empty()) p.errors.push_back("no [nodes] section");
  validate(p, s);
  if (!p.errors.empty()) throw ScenarioError(std::move(p.errors));
  return s;
}

std::string print_scenario(const Scenario& s) {
  std::ostringstream os;
  SimParams def;
  os << "name=" << s.name << "\n";
  os << "seed=" << s.seed << "\n";
  os << "run_until=" << s.run_until << "\n";
  if (s.params.wan_latency != def.wan_latency) os << "wan_latency=" << s.params.wan_latency << "\n";
  if (s.params.edge_lan_latency != def.edge_lan_latency)
    os << "edge_latency=" << s.params.edge_lan_latency << "\n";
  if (s.params.cloud_lan_latency != def.cloud_lan_latency)
    os << "cloud_latency=" << s.params.cloud_lan_latency << "\n";
  if (s.params.batch_size != def.batch_size) os << "batch=" << s.params.batch_size << "\n";
  if (s.params.re_replication != def.re_replication)
    os << "re_replication=" << (s.params.re_replication ? "on" : "off") << "\n";
  os << "\n[nodes]\n";
  for (const auto& n : s.nodes)
    os << "id=" << n.id << " cluster=" << to_string(n.cluster) << " role=" << to_string(n.role)
       << "\n";
  os << "\n[topics]\n";
  for (const auto& t : s.topics) {
    os << "id=" << t.id << " cluster=" << to_string(t.cluster) << " rf=" << t.replication_factor;
    if (!t.replicas.empty()) {
      os << " replicas=";
      for (std::size_t i = 0; i < t.replicas.size(); ++i) os << (i ? "," : "") << t.replicas[i];
    }
    os << "\n";
  }
  os << "\n[pipeline]\n";
  for (const auto& st : s.pipeline) {
    os << "stage=" << st.id << " kind=" << to_string(st.kind);
    if (st.input) os << " input=" << *st.input;
    if (st.output) os << " output=" << *st.output;
    os << " affinity=" << to_string(st.affinity) << " transform=" << st.transform_id << "\n";
  }
  os << "\n[workload]\n";
  for (const auto& w : s.workload)
    os << "time=" << w.time << " stage=" << w.stage << " count=" << w.count << "\n";
  os << "\n[faults]\n";
  for (const auto& f : s.faults)
    os << "time=" << f.time << " kind=" << to_string(f.kind) << " target=" << f.target << "\n";
  os << "\n[checks]\n";
  for (const auto& c : s.checks) {
    os << "check=" << c.name;
    for (const auto& [k, v] : c.args) os << " " << k << "=" << v;
    os << "\n";
  }
  return os.str();
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str());
}

const std::vector<std::string>& builtin_scenario_names() {
  static const std::vector<std::string> names = {"scenario1",   "scenario2", "scenario3",
                                                 "wan_outage",  "case_study_5node",
                                                 "threenode"};
  return names;
}

std::vector<Scenario> builtin_scenarios(const std::string& dir) {
  std::vector<Scenario> out;
  for (const auto& n : builtin_scenario_names()) {
    out.push_back(load_scenario_file(dir + "/" + n + ".scn"));
  }
  return out;
}

}  // namespace edgesim
