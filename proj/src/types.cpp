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

#include "edgesim/sim/types.hpp"

#include "edgesim/sim/bytes.hpp"

namespace edgesim {

const char* to_string(Cluster c) { return c == Cluster::edge ? "edge" : "cloud"; }

const char* to_string(NetDomain d) {
  switch (d) {
    case NetDomain::edge_lan: return "edge_lan";
    case NetDomain::cloud_lan: return "cloud_lan";
    case NetDomain::wan: return "wan";
  }
  return "?";
}

const char* to_string(Role r) { return r == Role::master ? "master" : "worker"; }

const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::up: return "up";
    case NodeStatus::suspected: return "suspected";
    case NodeStatus::failed: return "failed";
  }
  return "?";
}

std::uint64_t fnv1a(const Bytes& b) {
  std::uint64_t h = 1469598103934665603ull;
  for (auto c : b) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace edgesim
