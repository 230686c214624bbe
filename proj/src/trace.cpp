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

#include "edgesim/sim/trace.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace edgesim {

namespace {

// Detail keys and values share one line with the fixed fields, so they may
// not contain the separators.
void check_token(const std::string& s) {
  for (char c : s) {
    if (c == ' ' || c == ',' || c == ':' || c == '\n' || c == '=') {
      throw std::invalid_argument("trace token contains separator: " + s);
    }
  }
}

}  // namespace

std::string TraceEvent::format() const {
  std::ostringstream os;
  os << "time=" << time << " seq=" << seq << " kind=" << kind << " node=" << node << " detail=";
  bool first = true;
  for (const auto& [k, v] : detail) {
    if (!first) os << ',';
    first = false;
    os << k << ':' << v;
  }
  return os.str();
}

TraceEvent TraceEvent::parse(const std::string& line) {
  TraceEvent e;
  std::istringstream is(line);
  std::string tok;
  int field = 0;
  while (is >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad trace token: " + tok);
    std::string key = tok.substr(0, eq);
    std::string val = tok.substr(eq + 1);
    switch (field) {
      case 0:
        if (key != "time") throw std::invalid_argument("expected time= in: " + line);
        e.time = std::stoull(val);
        break;
      case 1:
        if (key != "seq") throw std::invalid_argument("expected seq= in: " + line);
        e.seq = std::stoull(val);
        break;
      case 2:
        if (key != "kind") throw std::invalid_argument("expected kind= in: " + line);
        e.kind = val;
        break;
      case 3:
        if (key != "node") throw std::invalid_argument("expected node= in: " + line);
        e.node = val;
        break;
      case 4: {
        if (key != "detail") throw std::invalid_argument("expected detail= in: " + line);
        std::size_t pos = 0;
        while (pos < val.size()) {
          auto comma = val.find(',', pos);
          std::string item = val.substr(pos, comma == std::string::npos ? comma : comma - pos);
          if (!item.empty()) {
            auto colon = item.find(':');
            if (colon == std::string::npos)
              throw std::invalid_argument("bad detail item: " + item);
            e.detail.emplace_back(item.substr(0, colon), item.substr(colon + 1));
          }
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
        break;
      }
      default:
        throw std::invalid_argument("trailing trace field: " + tok);
    }
    ++field;
  }
  if (field < 5) throw std::invalid_argument("short trace line: " + line);
  return e;
}

const std::string& TraceEvent::get(const std::string& key) const {
  static const std::string empty;
  for (const auto& [k, v] : detail)
    if (k == key) return v;
  return empty;
}

bool TraceEvent::has(const std::string& key) const {
  for (const auto& [k, v] : detail)
    if (k == key) return true;
  return false;
}

void TraceLog::emit(SimTime t, const std::string& kind, const std::string& node, Detail detail) {
  check_token(kind);
  check_token(node);
  for (const auto& [k, v] : detail) {
    check_token(k);
    check_token(v);
  }
  events_.push_back(TraceEvent{t, next_seq_++, kind, node, std::move(detail)});
}

void TraceLog::write(std::ostream& os) const {
  for (const auto& e : events_) os << e.format() << '\n';
}

std::string TraceLog::to_string() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

std::vector<TraceEvent> TraceLog::read(std::istream& is) {
  std::vector<TraceEvent> out;
  std::string line;
  SimTime t = 0;
  std::uint64_t seq = 0;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    TraceEvent e = TraceEvent::parse(line);
    if (!first && (e.time < t || (e.time == t && e.seq <= seq)))
      throw std::invalid_argument("trace (time,seq) not increasing at: " + line);
    t = e.time;
    seq = e.seq;
    first = false;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<TraceEvent> TraceLog::read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open trace file: " + path);
  return read(f);
}

}  // namespace edgesim
