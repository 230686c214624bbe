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

#include <map>
#include <string>

#include "edgesim/sim/types.hpp"

namespace edgesim {

/// Immutable payload unit. (producer_id, producer_seq) identifies the logical
/// record end to end; transforms rewrite the payload but keep the identity.
struct Record {
  std::string producer_id;
  std::uint64_t producer_seq = 0;
  SimTime origin_time = 0;
  Bytes payload;

  bool operator==(const Record&) const = default;
};

// Durable log segment framing, one entry per record:
//   len(4, big-endian) | producer_id_len(2) | producer_id |
//   producer_seq(8) | origin_time(8) | payload
// `len` counts everything after itself. Offsets are implicit by position.
// Topic dump files use the identical framing.

void encode_record(Bytes& out, const Record& r);
Bytes encode_records(const std::vector<Record>& rs);
std::vector<Record> decode_records(const Bytes& blob);

void write_dump_file(const std::string& path, const std::vector<Record>& rs);
std::vector<Record> read_dump_file(const std::string& path);

// Consumer-group offset table codec (broker-internal durable format).
Bytes encode_offsets(const std::map<std::string, std::uint64_t>& offsets);
std::map<std::string, std::uint64_t> decode_offsets(const Bytes& blob);

}  // namespace edgesim
