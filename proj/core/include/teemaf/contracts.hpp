// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0
//
// The two deterministic contracts. The DApp contract holds the registered
// off-chain key and verifies interaction signatures; the service-provider
// contract runs the DROP worker registry, orchestration, and status
// reporting, with every state-mutating method behind OnChainAttestation.
//
// Method ABI (argument encoding per abi.hpp):
//   DApp contract:
//     RegisterPK(address ea)                            owner only
//     OffChainFunctionSignatureVerify(bytes msg, sig)   returns bool byte
//   Service-provider contract:
//     RegisterRoleKey(str role, address ea)             owner only
//     OnChainAttestation(str role, bytes msg, sig)      returns bool byte
//     OffChainWorkerRegister(str id, address ctrl, bytes msg, sig)
//     OffChainWorkerLookup()                            returns id list
//     OffChainFunctionDeploy(fixed32 cid, str worker, bytes msg, sig)
//     ReportStatus(u64 deployment, u8 state, bytes msg, sig)

#pragma once

#include <optional>
#include <set>
#include <vector>

#include "teemaf/abi.hpp"
#include "teemaf/chain.hpp"

namespace teemaf::contracts {

struct ExecutionCosts {
  std::int64_t method_cost_ms = 0;
  // Charged per on-chain signature recovery; drives the RA latency
  // overhead the evaluation measures.
  std::int64_t signature_verify_cost_ms = 4;
};

// Deterministic address for a named deployment.
crypto::EthAddress contract_address(std::string_view label);

// Replays of an accepted (msg, sig) pair are rejected unless the
// simulation runs in faithful mode, which reproduces the paper's scheme
// without the guard.
class DAppAttestationContract final : public chain::Contract {
 public:
  DAppAttestationContract(crypto::EthAddress owner, ExecutionCosts costs,
                          bool faithful_replay);

  Result<Bytes> call(chain::CallContext& ctx, std::string_view method,
                     const Bytes& args) override;
  std::map<std::string, Bytes> state_map() const override;

  const std::optional<crypto::EthAddress>& registered_ea() const {
    return registered_ea_;
  }
  std::size_t seen_nonce_count() const { return seen_nonces_.size(); }

  static Bytes register_pk_args(const crypto::EthAddress& ea);
  static Bytes verify_args(ByteSpan msg, const crypto::Signature& sig);

 private:
  Result<Bytes> register_pk(chain::CallContext& ctx, const Bytes& args);
  Result<Bytes> verify(chain::CallContext& ctx, const Bytes& args);

  crypto::EthAddress owner_;
  ExecutionCosts costs_;
  bool faithful_replay_;
  std::optional<crypto::EthAddress> registered_ea_;
  std::set<Hash32> seen_nonces_;
};

enum class WorkerStatus : std::uint8_t { kAvailable = 0, kBusy = 1, kOffline = 2 };
enum class DeploymentState : std::uint8_t {
  kPending = 0,
  kRunning = 1,
  kCompleted = 2,
  kFailed = 3
};
std::string_view to_string(WorkerStatus status);
std::string_view to_string(DeploymentState state);

struct WorkerRecord {
  std::string worker_id;
  crypto::EthAddress controller_ea;
  bool attested = false;
  WorkerStatus status = WorkerStatus::kOffline;
};

struct DeploymentRecord {
  std::uint64_t deployment_id = 0;
  crypto::EthAddress requester;
  Hash32 image_cid{};
  std::string worker_id;
  DeploymentState state = DeploymentState::kPending;
};

// Role identifiers for the OnChainAttestation key registry.
std::string sp_agent_role();
std::string worker_role(std::string_view worker_id);
std::string user_role(const crypto::EthAddress& user);

class ServiceProviderContract final : public chain::Contract {
 public:
  ServiceProviderContract(crypto::EthAddress owner, ExecutionCosts costs,
                          bool ra_enabled, bool faithful_replay);

  Result<Bytes> call(chain::CallContext& ctx, std::string_view method,
                     const Bytes& args) override;
  std::map<std::string, Bytes> state_map() const override;

  std::vector<WorkerRecord> available_workers() const;
  const WorkerRecord* worker(std::string_view worker_id) const;
  const DeploymentRecord* deployment(std::uint64_t id) const;
  std::size_t worker_count() const { return workers_.size(); }
  std::size_t deployment_count() const { return deployments_.size(); }
  int busy_worker_count() const;
  int active_deployment_count() const;  // pending or running
  bool ra_enabled() const { return ra_enabled_; }

  static Bytes register_role_key_args(std::string_view role,
                                      const crypto::EthAddress& ea);
  static Bytes attestation_args(std::string_view role, ByteSpan msg,
                                const crypto::Signature& sig);
  static Bytes worker_register_args(std::string_view worker_id,
                                    const crypto::EthAddress& controller,
                                    ByteSpan msg, const crypto::Signature& sig);
  static Bytes deploy_args(const Hash32& image_cid, std::string_view worker_id,
                           ByteSpan msg, const crypto::Signature& sig);
  static Bytes report_status_args(std::uint64_t deployment_id,
                                  DeploymentState state, ByteSpan msg,
                                  const crypto::Signature& sig);

 private:
  // The generic gate: recover the signer of msg and compare against the
  // role's registered key; accepted nonce hashes are replay-guarded.
  Result<void> attestation_gate(chain::CallContext& ctx, const std::string& role,
                                ByteSpan msg, const crypto::Signature& sig);

  Result<Bytes> register_role_key(chain::CallContext& ctx, const Bytes& args);
  Result<Bytes> on_chain_attestation(chain::CallContext& ctx, const Bytes& args);
  Result<Bytes> worker_register(chain::CallContext& ctx, const Bytes& args);
  Result<Bytes> worker_lookup(chain::CallContext& ctx) const;
  Result<Bytes> deploy(chain::CallContext& ctx, const Bytes& args);
  Result<Bytes> report_status(chain::CallContext& ctx, const Bytes& args);

  crypto::EthAddress owner_;
  ExecutionCosts costs_;
  bool ra_enabled_;
  bool faithful_replay_;
  std::map<std::string, crypto::EthAddress> role_keys_;
  std::set<Hash32> seen_nonces_;
  std::map<std::string, WorkerRecord> workers_;
  std::map<std::uint64_t, DeploymentRecord> deployments_;
  std::uint64_t next_deployment_id_ = 1;
};

}  // namespace teemaf::contracts
