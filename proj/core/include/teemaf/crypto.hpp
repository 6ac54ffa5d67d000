// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0
//
// secp256k1 ECDSA with public-key recovery, wired to the Ethereum
// conventions the on-chain verification uses: addresses are the last 20
// bytes of Keccak-256 over the 64-byte uncompressed public key, message
// digests carry the "\x19Ethereum Signed Message:\n" prefix, signatures
// are low-s with recovery id v in {27, 28}, and nonces follow RFC 6979
// so signing is a pure function.

#pragma once

#include <compare>

#include "teemaf/bytes.hpp"
#include "teemaf/result.hpp"
#include "teemaf/rng.hpp"

namespace teemaf::crypto {

struct EthAddress {
  ByteArray<20> bytes{};

  auto operator<=>(const EthAddress&) const = default;
  std::string hex() const { return to_hex(bytes); }
};

struct KeyPair {
  ByteArray<32> sk{};  // scalar in [1, n-1]
  ByteArray<64> pk{};  // uncompressed x||y, no 0x04 prefix

  bool operator==(const KeyPair&) const = default;
};

struct Signature {
  ByteArray<32> r{};
  ByteArray<32> s{};  // normalized: s <= n/2
  std::uint8_t v = 27;

  bool operator==(const Signature&) const = default;
};

struct MessageDigest {
  Hash32 bytes{};

  auto operator<=>(const MessageDigest&) const = default;
};

// Rejection-samples a scalar from the rng; same rng state, same pair.
KeyPair keygen(Rng& rng);
KeyPair keygen(std::uint64_t seed);

// Bootstrap/test hook and the secret-injection path: rebuild a pair from
// raw private-key bytes. Fails with "invalid-key" outside [1, n-1].
Result<KeyPair> keypair_from_sk(const ByteArray<32>& sk);

// Last 20 bytes of Keccak-256 over the raw public key.
// Fails with "invalid-point" when (x, y) is not on the curve.
Result<EthAddress> derive_address(const ByteArray<64>& pk);

// Keccak-256("\x19Ethereum Signed Message:\n" + decimal(len) + msg).
MessageDigest eth_signed_message_hash(ByteSpan msg);

// Deterministic ECDSA over eth_signed_message_hash(msg).
Result<Signature> sign(ByteSpan msg, const ByteArray<32>& sk);

// Address of the unique public key that produced sig over digest.
// Fails with "unrecoverable" instead of returning a garbage address.
Result<EthAddress> recover(const MessageDigest& digest, const Signature& sig);

}  // namespace teemaf::crypto
