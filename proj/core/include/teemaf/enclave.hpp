// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0
//
// Simulated SGX-style platform: image measurement, enclave launch,
// EREPORT, local attestation + quote signing, and quote verification.
// Measurement is a single Keccak-256 over the image bytes; the protocol
// only needs "any tamper changes the measurement".

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "teemaf/bytes.hpp"
#include "teemaf/crypto.hpp"
#include "teemaf/result.hpp"
#include "teemaf/rng.hpp"

namespace teemaf::enclave {

using Measurement = Hash32;

struct Report;
struct Quote;

Measurement measure(ByteSpan code);

// One SGX-capable machine. The root provisioning key is burned in at
// construction and never leaves this class; quotes are signed with an
// attestation key derived from (rpk, firmware_version), so a firmware
// rollback changes the key the platform signs with.
class PlatformIdentity {
 public:
  PlatformIdentity(std::uint64_t platform_id, const ByteArray<32>& rpk,
                   std::uint32_t firmware_version);

  static PlatformIdentity provision(std::uint64_t platform_id, Rng& rng,
                                    std::uint32_t firmware_version);

  std::uint64_t platform_id() const { return platform_id_; }
  std::uint32_t firmware_version() const { return firmware_version_; }
  const ByteArray<64>& attestation_public_key() const { return ak_.pk; }

  // Threat hook: re-flash the firmware. Re-derives the attestation key.
  void set_firmware_version(std::uint32_t version);

 private:
  friend Result<Quote> las_quote(const Report&, const PlatformIdentity&);

  void derive_attestation_key();

  std::uint64_t platform_id_;
  std::uint32_t firmware_version_;
  ByteArray<32> rpk_;
  crypto::KeyPair ak_;
};

struct EnclaveImage {
  Bytes code;
  Measurement mre{};

  static EnclaveImage from_code(Bytes code);
};

struct Report {
  Measurement mre{};
  ByteArray<64> report_data{};  // freshness nonce (32) + requester binding (32)
  std::uint64_t platform_id = 0;
  std::uint32_t firmware_version = 0;

  Bytes serialize() const;
  bool operator==(const Report&) const = default;
};

struct Quote {
  Report report;
  crypto::Signature ak_signature;
};

enum class AvrReason { kNone, kBadSignature, kUnknownPlatform, kStaleFirmware };
std::string_view to_string(AvrReason reason);

// §III-B step 5 verdict. Failures are negative reports, not errors.
struct AttestationVerificationReport {
  bool positive = false;
  Measurement quoted_mre{};
  std::uint64_t platform_id = 0;
  AvrReason reason = AvrReason::kNone;
};
using Avr = AttestationVerificationReport;

struct EnclaveHandle {
  std::uint64_t id = 0;
  std::uint64_t platform_id = 0;
  Measurement mre{};
};

// Launched-enclave bookkeeping for one simulation. Handles are confined
// to the simulated container that launched them.
class EnclaveHost {
 public:
  EnclaveHandle launch(const EnclaveImage& image, const PlatformIdentity& platform);
  Result<Report> ereport(const EnclaveHandle& handle,
                         const ByteArray<64>& report_data) const;
  void terminate(const EnclaveHandle& handle);

 private:
  struct LiveEnclave {
    const PlatformIdentity* platform;
    Measurement mre;
    bool live;
  };
  std::map<std::uint64_t, LiveEnclave> enclaves_;
  std::uint64_t next_id_ = 1;
};

// LAS role: local attestation (same-platform check) then quote signing.
Result<Quote> las_quote(const Report& report, const PlatformIdentity& platform);

// Known-platform set the attestation service trusts.
struct PlatformRegistry {
  struct Entry {
    ByteArray<64> attestation_pk{};
    std::uint32_t min_firmware = 0;
  };
  std::map<std::uint64_t, Entry> entries;

  void enroll(const PlatformIdentity& platform, std::uint32_t min_firmware);

  // Line-oriented: platform_id_hex attestation_pk_hex min_firmware
  std::string to_text() const;
  static Result<PlatformRegistry> from_text(const std::string& text);
};

Avr verify_quote(const Quote& quote, const PlatformRegistry& registry);

// IAS/DCAP collapsed to one pluggable verification entry point.
struct AttestationVerifier {
  virtual ~AttestationVerifier() = default;
  virtual Avr verify(const Quote& quote) const = 0;
};

class SimulatedAttestationService final : public AttestationVerifier {
 public:
  explicit SimulatedAttestationService(PlatformRegistry registry)
      : registry_(std::move(registry)) {}

  Avr verify(const Quote& quote) const override {
    return verify_quote(quote, registry_);
  }

  PlatformRegistry& registry() { return registry_; }
  const PlatformRegistry& registry() const { return registry_; }

 private:
  PlatformRegistry registry_;
};

}  // namespace teemaf::enclave
