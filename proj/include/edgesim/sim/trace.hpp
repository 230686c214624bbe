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

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "edgesim/sim/types.hpp"

namespace edgesim {

using Detail = std::vector<std::pair<std::string, std::string>>;

/// One observable event. Serialized one per line as
///   time=<int> seq=<int> kind=<word> node=<id> detail=<key:value,...>
/// with a stable field order so traces can be compared byte for byte.
struct TraceEvent {
  SimTime time = 0;
  std::uint64_t seq = 0;
  std::string kind;
  std::string node;  // "-" for world-level events
  Detail detail;

  std::string format() const;
  static TraceEvent parse(const std::string& line);

  // First value for a detail key, or "" when absent.
  const std::string& get(const std::string& key) const;
  bool has(const std::string& key) const;
};

/// Append-only event history of a run. (time, seq) is strictly increasing.
class TraceLog {
 public:
  void emit(SimTime t, const std::string& kind, const std::string& node, Detail detail);

  const std::vector<TraceEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

  void write(std::ostream& os) const;
  std::string to_string() const;
  static std::vector<TraceEvent> read(std::istream& is);
  static std::vector<TraceEvent> read_file(const std::string& path);

 private:
  std::vector<TraceEvent> events_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace edgesim
