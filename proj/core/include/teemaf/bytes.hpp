// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace teemaf {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

template <std::size_t N>
using ByteArray = std::array<std::uint8_t, N>;

using Hash32 = ByteArray<32>;

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline void append(Bytes& out, ByteSpan data) {
  out.insert(out.end(), data.begin(), data.end());
}

inline void append(Bytes& out, std::string_view s) {
  out.insert(out.end(), s.begin(), s.end());
}

// Big-endian integer append; fixed widths keep every serialization canonical.
inline void append_u32be(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void append_u64be(Bytes& out, std::uint64_t v) {
  append_u32be(out, static_cast<std::uint32_t>(v >> 32));
  append_u32be(out, static_cast<std::uint32_t>(v));
}

std::string to_hex(ByteSpan data);
std::optional<Bytes> from_hex(std::string_view hex);

template <std::size_t N>
std::optional<ByteArray<N>> from_hex_fixed(std::string_view hex) {
  auto v = from_hex(hex);
  if (!v || v->size() != N) return std::nullopt;
  ByteArray<N> out{};
  std::copy(v->begin(), v->end(), out.begin());
  return out;
}

template <std::size_t N>
ByteArray<N> slice(ByteSpan data, std::size_t offset) {
  ByteArray<N> out{};
  for (std::size_t i = 0; i < N && offset + i < data.size(); ++i)
    out[i] = data[offset + i];
  return out;
}

// True when `needle` occurs as a contiguous subsequence of `haystack`.
// Used by the secret-leak audits.
bool contains_bytes(ByteSpan haystack, ByteSpan needle);

}  // namespace teemaf
