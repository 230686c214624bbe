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

#include "edgesim/sim/node_runtime.hpp"

namespace edgesim {

void NodeRuntime::on_start(Runtime& rt) {
  broker_.on_start(rt);
  stages_.on_start(rt);
  if (manager_) manager_->on_start(rt);
  rt.schedule_self(rt.params().heartbeat_interval, make_msg<HeartbeatTick>());
}

void NodeRuntime::on_message(Runtime& rt, const NodeId& from, const MessageBase& m) {
  if (dynamic_cast<const HeartbeatTick*>(&m)) {
    for (const auto& n : rt.directory()) {
      if (n.cluster == rt.self_info().cluster && n.role == Role::master) {
        rt.send(n.id, make_msg<NodeHeartbeat>());
      }
    }
    rt.schedule_self(rt.params().heartbeat_interval, make_msg<HeartbeatTick>());
    return;
  }
  if (auto* push = dynamic_cast<const ConfigPush*>(&m)) {
    broker_.apply_config(rt, *push);
    stages_.apply_config(rt, *push);
    return;
  }
  if (manager_ && manager_->handle(rt, from, m)) return;
  if (broker_.handle(rt, from, m)) return;
  if (stages_.handle(rt, from, m)) return;
}

}  // namespace edgesim
