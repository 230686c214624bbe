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

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "edgesim/sim/kernel.hpp"
#include "edgesim/sim/messages.hpp"

namespace edgesim::test {

struct NoteMsg : MessageBase {
  std::string text;
  const char* type_name() const override { return "NoteMsg"; }
};

inline MessagePtr note(std::string text) {
  auto m = std::make_shared<NoteMsg>();
  m->text = std::move(text);
  return m;
}

/// Records every delivery; an optional script runs on each message.
class Probe : public Process {
 public:
  struct Seen {
    SimTime time;
    NodeId from;
    std::string text;
  };

  using Script = std::function<void(Runtime&, const NodeId&, const MessageBase&)>;

  // The recording store outlives crash-induced re-instantiation.
  explicit Probe(std::vector<Seen>* sink, Script script = {})
      : sink_(sink), script_(std::move(script)) {}

  void on_start(Runtime&) override {}
  void on_message(Runtime& rt, const NodeId& from, const MessageBase& m) override {
    if (auto* n = dynamic_cast<const NoteMsg*>(&m)) {
      sink_->push_back({rt.now(), from, n->text});
    } else {
      sink_->push_back({rt.now(), from, m.type_name()});
    }
    if (script_) script_(rt, from, m);
  }

 private:
  std::vector<Seen>* sink_;
  Script script_;
};

inline ProcessFactory probe_factory(std::vector<Probe::Seen>* sink, Probe::Script script = {}) {
  return [sink, script]() { return std::make_unique<Probe>(sink, script); };
}

/// Fresh working directory under the test binary's cwd.
inline std::string test_dir(const std::string& name) {
  std::string p = "test_out/" + name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace edgesim::test
