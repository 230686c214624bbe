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

#include "edgesim/cluster/manager.hpp"
#include "edgesim/pipeline/stage.hpp"

namespace edgesim {

/// The volatile process of one node: broker replicas, stage instances, and
/// (on masters) the cluster manager, plus the node-liveness heartbeat.
class NodeRuntime : public Process {
 public:
  NodeRuntime(bool is_master, ManagerDesired desired, std::map<TopicId, Cluster> topic_dir)
      : stages_(std::move(topic_dir)) {
    if (is_master) manager_.emplace(std::move(desired));
  }

  void on_start(Runtime& rt) override;
  void on_message(Runtime& rt, const NodeId& from, const MessageBase& m) override;

  const BrokerCore& broker() const { return broker_; }
  const StageHost& stages() const { return stages_; }
  const ManagerCore* manager() const { return manager_ ? &*manager_ : nullptr; }

 private:
  BrokerCore broker_;
  StageHost stages_;
  std::optional<ManagerCore> manager_;
};

}  // namespace edgesim
