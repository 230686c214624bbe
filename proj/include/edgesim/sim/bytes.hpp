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

#include <cstdint>
#include <stdexcept>
#include <string>

#include "edgesim/sim/types.hpp"

namespace edgesim {

// Big-endian framing helpers shared by the durable log segment format,
// the config-command log format, and the topic dump files.

class ByteWriter {
 public:
  explicit ByteWriter(Bytes& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void u64(std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  // 2-byte length-prefixed string.
  void str16(const std::string& s) {
    if (s.size() > 0xffff) throw std::length_error("string too long for 16-bit frame");
    u16(static_cast<std::uint16_t>(s.size()));
    raw(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
  }
  // 4-byte length-prefixed blob.
  void blob32(const Bytes& b) {
    u32(static_cast<std::uint32_t>(b.size()));
    raw(b.data(), b.size());
  }
  void raw(const std::uint8_t* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  void raw(const Bytes& b) { raw(b.data(), b.size()); }

 private:
  Bytes& out_;
};

class ByteReader {
 public:
  ByteReader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
  explicit ByteReader(const Bytes& b) : ByteReader(b.data(), b.size()) {}

  bool done() const { return off_ == n_; }
  std::size_t remaining() const { return n_ - off_; }

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    const auto* q = take(2);
    return static_cast<std::uint16_t>((q[0] << 8) | q[1]);
  }
  std::uint32_t u32() {
    const auto* q = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | q[i];
    return v;
  }
  std::uint64_t u64() {
    const auto* q = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | q[i];
    return v;
  }
  std::string str16() {
    std::size_t len = u16();
    const auto* q = take(len);
    return std::string(reinterpret_cast<const char*>(q), len);
  }
  Bytes blob32() {
    std::size_t len = u32();
    const auto* q = take(len);
    return Bytes(q, q + len);
  }
  Bytes rawbytes(std::size_t len) {
    const auto* q = take(len);
    return Bytes(q, q + len);
  }

 private:
  const std::uint8_t* take(std::size_t k) {
    if (off_ + k > n_) throw std::out_of_range("truncated frame");
    const auto* q = p_ + off_;
    off_ += k;
    return q;
  }
  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t off_ = 0;
};

/// FNV-1a over a byte sequence; used for compact digests in trace details.
std::uint64_t fnv1a(const Bytes& b);
std::string hex64(std::uint64_t v);

}  // namespace edgesim
