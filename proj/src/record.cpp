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

#include "edgesim/log/record.hpp"

#include <fstream>
#include <stdexcept>

#include "edgesim/sim/bytes.hpp"

namespace edgesim {

void encode_record(Bytes& out, const Record& r) {
  ByteWriter w(out);
  std::uint32_t len = static_cast<std::uint32_t>(2 + r.producer_id.size() + 8 + 8 + r.payload.size());
  w.u32(len);
  w.str16(r.producer_id);
  w.u64(r.producer_seq);
  w.u64(r.origin_time);
  w.raw(r.payload);
}

Bytes encode_records(const std::vector<Record>& rs) {
  Bytes out;
  for (const auto& r : rs) encode_record(out, r);
  return out;
}

std::vector<Record> decode_records(const Bytes& blob) {
  std::vector<Record> out;
  ByteReader r(blob);
  while (!r.done()) {
    std::uint32_t len = r.u32();
    if (len < 18 || len > r.remaining()) throw std::invalid_argument("corrupt log segment entry");
    Record rec;
    std::size_t before = r.remaining();
    rec.producer_id = r.str16();
    rec.producer_seq = r.u64();
    rec.origin_time = r.u64();
    std::size_t header = before - r.remaining();
    rec.payload = r.rawbytes(len - header);
    out.push_back(std::move(rec));
  }
  return out;
}

void write_dump_file(const std::string& path, const std::vector<Record>& rs) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write dump file: " + path);
  Bytes blob = encode_records(rs);
  f.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
}

std::vector<Record> read_dump_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read dump file: " + path);
  Bytes blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_records(blob);
}

Bytes encode_offsets(const std::map<std::string, std::uint64_t>& offsets) {
  Bytes out;
  ByteWriter w(out);
  w.u32(static_cast<std::uint32_t>(offsets.size()));
  for (const auto& [group, off] : offsets) {
    w.str16(group);
    w.u64(off);
  }
  return out;
}

std::map<std::string, std::uint64_t> decode_offsets(const Bytes& blob) {
  std::map<std::string, std::uint64_t> out;
  ByteReader r(blob);
  std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string g = r.str16();
    out[g] = r.u64();
  }
  return out;
}

}  // namespace edgesim
