// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#include "teemaf/keccak.hpp"

#include <bit>
#include <cstring>

namespace teemaf::crypto {
namespace {

constexpr int kRounds = 24;
constexpr std::size_t kRate = 136;  // 1600 - 2*256 bits

constexpr std::uint64_t kRoundConstants[kRounds] = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL,
    0x8000000080008000ULL, 0x000000000000808bULL, 0x0000000080000001ULL,
    0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008aULL,
    0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL,
    0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
    0x000000000000800aULL, 0x800000008000000aULL, 0x8000000080008081ULL,
    0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL};

// Rotation offsets laid out lane-index-major (index = x + 5y).
constexpr int kRho[25] = {0,  1,  62, 28, 27, 36, 44, 6,  55, 20, 3,  10, 43,
                          25, 39, 41, 45, 15, 21, 8,  18, 2,  61, 56, 14};

void keccak_f(std::uint64_t a[25]) {
  for (int round = 0; round < kRounds; ++round) {
    std::uint64_t c[5], d[5];
    for (int x = 0; x < 5; ++x)
      c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
    for (int x = 0; x < 5; ++x)
      d[x] = c[(x + 4) % 5] ^ std::rotl(c[(x + 1) % 5], 1);
    for (int i = 0; i < 25; ++i) a[i] ^= d[i % 5];

    std::uint64_t b[25];
    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y)
        b[y + 5 * ((2 * x + 3 * y) % 5)] = std::rotl(a[x + 5 * y], kRho[x + 5 * y]);

    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y)
        a[x + 5 * y] = b[x + 5 * y] ^ (~b[(x + 1) % 5 + 5 * y] & b[(x + 2) % 5 + 5 * y]);

    a[0] ^= kRoundConstants[round];
  }
}

}  // namespace

Hash32 keccak256(ByteSpan data) {
  std::uint64_t state[25] = {};
  std::size_t off = 0;

  auto absorb = [&](const std::uint8_t* block) {
    for (std::size_t i = 0; i < kRate / 8; ++i) {
      std::uint64_t lane;
      std::memcpy(&lane, block + 8 * i, 8);  // little-endian hosts only
      state[i] ^= lane;
    }
    keccak_f(state);
  };

  while (data.size() - off >= kRate) {
    absorb(data.data() + off);
    off += kRate;
  }

  std::uint8_t last[kRate] = {};
  const std::size_t tail = data.size() - off;
  if (tail) std::memcpy(last, data.data() + off, tail);
  last[tail] ^= 0x01;  // Keccak (not SHA-3) domain padding
  last[kRate - 1] ^= 0x80;
  absorb(last);

  Hash32 out{};
  std::memcpy(out.data(), state, 32);
  return out;
}

}  // namespace teemaf::crypto
