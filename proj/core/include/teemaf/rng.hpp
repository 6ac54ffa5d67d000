// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "teemaf/bytes.hpp"

namespace teemaf {

// The single source of randomness for a simulation run. Every component
// draws from its own labelled fork so byte streams stay stable when an
// unrelated component changes how much it consumes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t u64() { return gen_(); }

  // Uniform in [0, bound). bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(gen_);
  }

  std::uint8_t byte() { return static_cast<std::uint8_t>(below(256)); }

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = byte();
    return out;
  }

  template <std::size_t N>
  ByteArray<N> fixed() {
    ByteArray<N> out{};
    for (auto& b : out) b = byte();
    return out;
  }

  // Independent substream; deterministic in (seed, label).
  Rng fork(std::string_view label) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace teemaf
