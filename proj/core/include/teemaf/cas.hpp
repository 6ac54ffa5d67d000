// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0
//
// Simulated SCONE CAS: stores owner security policies and releases the
// policy secrets only when, in one single-use session, the quote's
// freshness nonce, measurement, and attestation verdict all check out.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "teemaf/crypto.hpp"
#include "teemaf/enclave.hpp"

namespace teemaf::cas {

// Required secret names in every policy.
inline constexpr std::string_view kSecretSk = "sk_offcf";
inline constexpr std::string_view kSecretSca = "sca_dapp";

struct Policy {
  std::string sid;
  enclave::Measurement mre{};
  std::map<std::string, Bytes, std::less<>> secrets;
  crypto::EthAddress owner{};

  // sid non-empty, secrets include a 32-byte sk_offcf and 20-byte sca_dapp.
  Result<void> validate() const;

  std::string to_json() const;
  static Result<Policy> from_json(const std::string& text);
};

struct SecretBundle {
  ByteArray<32> sk_offcf{};
  crypto::EthAddress sca_dapp{};
  std::uint64_t session_id = 0;
};

// Gate refusals are data so the benchmark and threat suites can count
// them. Codes: nonce-mismatch | mre-mismatch | attestation-failed.
struct Refusal {
  std::string code;
  std::string detail;
};

struct SessionStart {
  std::uint64_t session_id = 0;
  Hash32 nonce{};
};

// report_data layout: nonce (32) followed by the requester binding (32).
Hash32 endpoint_binding(std::string_view sid, std::uint64_t enclave_handle_id);
ByteArray<64> make_report_data(const Hash32& nonce, const Hash32& binding);

// A positive gate decision: the secrets plus the only endpoint the
// channel will deliver them to.
struct InjectionGrant {
  SecretBundle bundle;
  Hash32 authorized_endpoint{};
};

using InjectOutcome = std::variant<InjectionGrant, Refusal>;

// The TLS stand-in. Delivery succeeds only for the endpoint the grant
// was issued to; anything else is refused.
Result<SecretBundle> deliver(const InjectionGrant& grant,
                             const Hash32& receiver_endpoint);

class CasService {
 public:
  CasService(const enclave::AttestationVerifier& verifier, Rng nonce_rng)
      : verifier_(verifier), rng_(std::move(nonce_rng)) {}

  // Append-only store; sids are unique ("duplicate-sid" on collision).
  Result<void> register_policy(Policy policy);

  // Opens a single-use session expiring 60 virtual seconds later.
  Result<SessionStart> begin_session(std::string_view sid, std::int64_t now_ms);

  // Closes the session either way. Order of checks: nonce, mre, AVR.
  Result<InjectOutcome> verify_and_inject(std::uint64_t session_id,
                                          const enclave::Quote& quote,
                                          std::int64_t now_ms);

  const Policy* find_policy(std::string_view sid) const;
  std::size_t policy_count() const { return policies_.size(); }

  static constexpr std::int64_t kSessionTtlMs = 60'000;

 private:
  struct Session {
    std::string sid;
    Hash32 nonce{};
    std::int64_t expires_ms = 0;
    bool open = false;
  };

  const enclave::AttestationVerifier& verifier_;
  Rng rng_;
  std::map<std::string, Policy, std::less<>> policies_;
  std::map<std::uint64_t, Session> sessions_;
  std::uint64_t next_session_ = 1;
};

// Test-support enumeration of the release gate: all 8 combinations of
// {nonce ok, mre ok, AVR positive}; only (1,1,1) may release.
struct GateRow {
  bool nonce_ok = false;
  bool mre_ok = false;
  bool avr_ok = false;
  bool released = false;
  std::string refusal;
};
std::vector<GateRow> exhaustive_gate_truth_table();

}  // namespace teemaf::cas
