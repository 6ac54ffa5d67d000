// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#include "teemaf/sha256.hpp"

#include <bit>
#include <cstring>

namespace teemaf::crypto {
namespace {

constexpr std::uint32_t kK[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
    0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
    0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
    0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
    0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
    0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
    0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
    0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

struct Sha256Ctx {
  std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                        0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  std::uint8_t buf[64];
  std::uint64_t total = 0;

  void compress(const std::uint8_t* p) {
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | p[4 * i + 3];
    for (int i = 16; i < 64; ++i) {
      const std::uint32_t s0 =
          std::rotr(w[i - 15], 7) ^ std::rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      const std::uint32_t s1 =
          std::rotr(w[i - 2], 17) ^ std::rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
    std::uint32_t e = h[4], f = h[5], g = h[6], hh = h[7];
    for (int i = 0; i < 64; ++i) {
      const std::uint32_t s1 = std::rotr(e, 6) ^ std::rotr(e, 11) ^ std::rotr(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t t1 = hh + s1 + ch + kK[i] + w[i];
      const std::uint32_t s0 = std::rotr(a, 2) ^ std::rotr(a, 13) ^ std::rotr(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t t2 = s0 + maj;
      hh = g; g = f; f = e; e = d + t1;
      d = c; c = b; b = a; a = t1 + t2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d;
    h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
  }

  void update(ByteSpan data) {
    std::size_t fill = total % 64;
    total += data.size();
    std::size_t off = 0;
    if (fill) {
      const std::size_t take = std::min<std::size_t>(64 - fill, data.size());
      std::memcpy(buf + fill, data.data(), take);
      off = take;
      if (fill + take < 64) return;
      compress(buf);
    }
    while (data.size() - off >= 64) {
      compress(data.data() + off);
      off += 64;
    }
    if (off < data.size()) std::memcpy(buf, data.data() + off, data.size() - off);
  }

  Hash32 finish() {
    const std::uint64_t bits = total * 8;
    std::uint8_t pad[72] = {0x80};
    const std::size_t fill = total % 64;
    const std::size_t pad_len = (fill < 56) ? 56 - fill : 120 - fill;
    std::uint8_t len_be[8];
    for (int i = 0; i < 8; ++i) len_be[i] = static_cast<std::uint8_t>(bits >> (56 - 8 * i));
    update(ByteSpan(pad, pad_len));
    update(ByteSpan(len_be, 8));
    Hash32 out{};
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 4; ++j)
        out[4 * i + j] = static_cast<std::uint8_t>(h[i] >> (24 - 8 * j));
    return out;
  }
};

}  // namespace

Hash32 sha256(ByteSpan data) {
  Sha256Ctx ctx;
  ctx.update(data);
  return ctx.finish();
}

Hash32 hmac_sha256(ByteSpan key, ByteSpan data) {
  std::uint8_t k[64] = {};
  if (key.size() > 64) {
    const Hash32 kh = sha256(key);
    std::memcpy(k, kh.data(), 32);
  } else if (!key.empty()) {
    std::memcpy(k, key.data(), key.size());
  }
  Bytes inner;
  inner.reserve(64 + data.size());
  for (int i = 0; i < 64; ++i) inner.push_back(k[i] ^ 0x36);
  append(inner, data);
  const Hash32 ih = sha256(inner);
  Bytes outer;
  outer.reserve(96);
  for (int i = 0; i < 64; ++i) outer.push_back(k[i] ^ 0x5c);
  append(outer, ih);
  return sha256(outer);
}

}  // namespace teemaf::crypto
