// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0
//
// Canonical method-argument serialization: length-prefixed byte fields
// and big-endian integers, fixed so transaction logs replay bit-exactly.

#pragma once

#include <string>
#include <string_view>

#include "teemaf/bytes.hpp"
#include "teemaf/crypto.hpp"

namespace teemaf::contracts {

class AbiWriter {
 public:
  AbiWriter& u8(std::uint8_t v) {
    out_.push_back(v);
    return *this;
  }
  AbiWriter& u32(std::uint32_t v) {
    append_u32be(out_, v);
    return *this;
  }
  AbiWriter& u64(std::uint64_t v) {
    append_u64be(out_, v);
    return *this;
  }
  AbiWriter& bytes(ByteSpan data) {
    append_u32be(out_, static_cast<std::uint32_t>(data.size()));
    append(out_, data);
    return *this;
  }
  AbiWriter& str(std::string_view s) {
    append_u32be(out_, static_cast<std::uint32_t>(s.size()));
    append(out_, s);
    return *this;
  }
  AbiWriter& address(const crypto::EthAddress& a) {
    append(out_, a.bytes);
    return *this;
  }
  AbiWriter& fixed32(const Hash32& h) {
    append(out_, h);
    return *this;
  }
  AbiWriter& signature(const crypto::Signature& sig) {
    append(out_, sig.r);
    append(out_, sig.s);
    out_.push_back(sig.v);
    return *this;
  }

  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

// Sticky-failure reader: parse everything, then check ok() once.
class AbiReader {
 public:
  explicit AbiReader(ByteSpan data) : data_(data) {}

  std::uint8_t u8() {
    if (!need(1)) return 0;
    return data_[pos_++];
  }
  std::uint32_t u32() {
    if (!need(4)) return 0;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
    return v;
  }
  std::uint64_t u64() {
    const std::uint64_t hi = u32();
    return (hi << 32) | u32();
  }
  Bytes bytes() {
    const std::uint32_t len = u32();
    if (!need(len)) return {};
    Bytes out(data_.begin() + pos_, data_.begin() + pos_ + len);
    pos_ += len;
    return out;
  }
  std::string str() {
    const Bytes b = bytes();
    return std::string(b.begin(), b.end());
  }
  crypto::EthAddress address() {
    crypto::EthAddress a;
    if (!need(20)) return a;
    std::copy_n(data_.begin() + pos_, 20, a.bytes.begin());
    pos_ += 20;
    return a;
  }
  Hash32 fixed32() {
    Hash32 h{};
    if (!need(32)) return h;
    std::copy_n(data_.begin() + pos_, 32, h.begin());
    pos_ += 32;
    return h;
  }
  crypto::Signature signature() {
    crypto::Signature sig;
    sig.r = fixed32();
    sig.s = fixed32();
    sig.v = u8();
    return sig;
  }

  // Every argument consumed, nothing missing, nothing trailing.
  bool ok() const { return !failed_ && pos_ == data_.size(); }

 private:
  bool need(std::size_t n) {
    if (failed_ || data_.size() - pos_ < n) {
      failed_ = true;
      return false;
    }
    return true;
  }

  ByteSpan data_;
  std::size_t pos_ = 0;
  bool failed_ = false;
};

}  // namespace teemaf::contracts
