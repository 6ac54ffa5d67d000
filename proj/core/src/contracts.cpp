// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#include "teemaf/contracts.hpp"

#include <cstring>

#include "teemaf/keccak.hpp"

namespace teemaf::contracts {

namespace {

Result<Bytes> revert(std::string code, std::string detail = {}) {
  return Result<Bytes>::failure(std::move(code), std::move(detail));
}

Bytes bool_byte(bool v) { return Bytes{static_cast<std::uint8_t>(v ? 1 : 0)}; }

}  // namespace

crypto::EthAddress contract_address(std::string_view label) {
  Bytes material;
  append(material, std::string_view("teemaf.contract."));
  append(material, label);
  const Hash32 h = crypto::keccak256(material);
  crypto::EthAddress addr;
  std::memcpy(addr.bytes.data(), h.data() + 12, 20);
  return addr;
}

std::string sp_agent_role() { return "sp-agent"; }

std::string worker_role(std::string_view worker_id) {
  return "worker:" + std::string(worker_id);
}

std::string user_role(const crypto::EthAddress& user) {
  return "user:" + user.hex();
}

std::string_view to_string(WorkerStatus status) {
  switch (status) {
    case WorkerStatus::kAvailable: return "available";
    case WorkerStatus::kBusy: return "busy";
    case WorkerStatus::kOffline: return "offline";
  }
  return "unknown";
}

std::string_view to_string(DeploymentState state) {
  switch (state) {
    case DeploymentState::kPending: return "pending";
    case DeploymentState::kRunning: return "running";
    case DeploymentState::kCompleted: return "completed";
    case DeploymentState::kFailed: return "failed";
  }
  return "unknown";
}

// ------------------------------------------------------------- DApp SC

DAppAttestationContract::DAppAttestationContract(crypto::EthAddress owner,
                                                 ExecutionCosts costs,
                                                 bool faithful_replay)
    : owner_(owner), costs_(costs), faithful_replay_(faithful_replay) {}

Bytes DAppAttestationContract::register_pk_args(const crypto::EthAddress& ea) {
  return AbiWriter().address(ea).take();
}

Bytes DAppAttestationContract::verify_args(ByteSpan msg,
                                           const crypto::Signature& sig) {
  return AbiWriter().bytes(msg).signature(sig).take();
}

Result<Bytes> DAppAttestationContract::call(chain::CallContext& ctx,
                                            std::string_view method,
                                            const Bytes& args) {
  ctx.charge_ms(costs_.method_cost_ms);
  if (method == "RegisterPK") return register_pk(ctx, args);
  if (method == "OffChainFunctionSignatureVerify") return verify(ctx, args);
  return revert("unknown-method", std::string(method));
}

Result<Bytes> DAppAttestationContract::register_pk(chain::CallContext& ctx,
                                                   const Bytes& args) {
  AbiReader reader(args);
  const crypto::EthAddress ea = reader.address();
  if (!reader.ok()) return revert("bad-args");
  if (!(ctx.sender() == owner_)) return revert("not-owner");
  registered_ea_ = ea;  // re-registration overwrites (key rotation)
  ctx.emit("pk-registered", AbiWriter().address(ea).take());
  return Bytes{};
}

Result<Bytes> DAppAttestationContract::verify(chain::CallContext& ctx,
                                              const Bytes& args) {
  AbiReader reader(args);
  const Bytes msg = reader.bytes();
  const crypto::Signature sig = reader.signature();
  if (!reader.ok()) return revert("bad-args");
  if (!registered_ea_) return revert("no-registered-key");

  ctx.charge_ms(costs_.signature_verify_cost_ms);
  const crypto::MessageDigest digest = crypto::eth_signed_message_hash(msg);
  const auto recovered = crypto::recover(digest, sig);

  bool accepted = recovered.ok() && recovered.value() == *registered_ea_;
  if (accepted && !faithful_replay_) {
    if (seen_nonces_.contains(digest.bytes))
      accepted = false;
    else
      seen_nonces_.insert(digest.bytes);
  }
  ctx.emit("verified",
           AbiWriter().u8(accepted ? 1 : 0).fixed32(digest.bytes).take());
  return bool_byte(accepted);
}

std::map<std::string, Bytes> DAppAttestationContract::state_map() const {
  std::map<std::string, Bytes> out;
  out["owner"] = Bytes(owner_.bytes.begin(), owner_.bytes.end());
  if (registered_ea_)
    out["registered_ea"] =
        Bytes(registered_ea_->bytes.begin(), registered_ea_->bytes.end());
  out["faithful_replay"] = bool_byte(faithful_replay_);
  Bytes seen;
  for (const auto& h : seen_nonces_) append(seen, h);
  out["seen_nonces"] = std::move(seen);
  return out;
}

// --------------------------------------------------------------- SC_SP

ServiceProviderContract::ServiceProviderContract(crypto::EthAddress owner,
                                                 ExecutionCosts costs,
                                                 bool ra_enabled,
                                                 bool faithful_replay)
    : owner_(owner),
      costs_(costs),
      ra_enabled_(ra_enabled),
      faithful_replay_(faithful_replay) {}

Bytes ServiceProviderContract::register_role_key_args(
    std::string_view role, const crypto::EthAddress& ea) {
  return AbiWriter().str(role).address(ea).take();
}

Bytes ServiceProviderContract::attestation_args(std::string_view role,
                                                ByteSpan msg,
                                                const crypto::Signature& sig) {
  return AbiWriter().str(role).bytes(msg).signature(sig).take();
}

Bytes ServiceProviderContract::worker_register_args(
    std::string_view worker_id, const crypto::EthAddress& controller,
    ByteSpan msg, const crypto::Signature& sig) {
  return AbiWriter().str(worker_id).address(controller).bytes(msg).signature(sig).take();
}

Bytes ServiceProviderContract::deploy_args(const Hash32& image_cid,
                                           std::string_view worker_id,
                                           ByteSpan msg,
                                           const crypto::Signature& sig) {
  return AbiWriter().fixed32(image_cid).str(worker_id).bytes(msg).signature(sig).take();
}

Bytes ServiceProviderContract::report_status_args(std::uint64_t deployment_id,
                                                  DeploymentState state,
                                                  ByteSpan msg,
                                                  const crypto::Signature& sig) {
  return AbiWriter()
      .u64(deployment_id)
      .u8(static_cast<std::uint8_t>(state))
      .bytes(msg)
      .signature(sig)
      .take();
}

Result<Bytes> ServiceProviderContract::call(chain::CallContext& ctx,
                                            std::string_view method,
                                            const Bytes& args) {
  ctx.charge_ms(costs_.method_cost_ms);
  if (method == "RegisterRoleKey") return register_role_key(ctx, args);
  if (method == "OnChainAttestation") return on_chain_attestation(ctx, args);
  if (method == "OffChainWorkerRegister") return worker_register(ctx, args);
  if (method == "OffChainWorkerLookup") return worker_lookup(ctx);
  if (method == "OffChainFunctionDeploy") return deploy(ctx, args);
  if (method == "ReportStatus") return report_status(ctx, args);
  return revert("unknown-method", std::string(method));
}

Result<void> ServiceProviderContract::attestation_gate(
    chain::CallContext& ctx, const std::string& role, ByteSpan msg,
    const crypto::Signature& sig) {
  if (!ra_enabled_) return {};  // control group: no verification, no cost

  const auto it = role_keys_.find(role);
  if (it == role_keys_.end())
    return Result<void>::failure("unknown-role", role);

  ctx.charge_ms(costs_.signature_verify_cost_ms);
  const crypto::MessageDigest digest = crypto::eth_signed_message_hash(msg);
  const auto recovered = crypto::recover(digest, sig);
  if (!recovered.ok() || !(recovered.value() == it->second))
    return Result<void>::failure("attestation-failed", role);
  if (!faithful_replay_) {
    if (seen_nonces_.contains(digest.bytes))
      return Result<void>::failure("attestation-failed", "replayed message");
    seen_nonces_.insert(digest.bytes);
  }
  return {};
}

Result<Bytes> ServiceProviderContract::register_role_key(
    chain::CallContext& ctx, const Bytes& args) {
  AbiReader reader(args);
  const std::string role = reader.str();
  const crypto::EthAddress ea = reader.address();
  if (!reader.ok() || role.empty()) return revert("bad-args");
  if (!(ctx.sender() == owner_)) return revert("not-owner");
  role_keys_[role] = ea;
  ctx.emit("role-key-registered", AbiWriter().str(role).address(ea).take());
  return Bytes{};
}

Result<Bytes> ServiceProviderContract::on_chain_attestation(
    chain::CallContext& ctx, const Bytes& args) {
  AbiReader reader(args);
  const std::string role = reader.str();
  const Bytes msg = reader.bytes();
  const crypto::Signature sig = reader.signature();
  if (!reader.ok()) return revert("bad-args");
  auto gate = attestation_gate(ctx, role, msg, sig);
  if (!gate.ok() && gate.error().code == "unknown-role")
    return revert("unknown-role", role);
  return bool_byte(gate.ok());
}

Result<Bytes> ServiceProviderContract::worker_register(chain::CallContext& ctx,
                                                       const Bytes& args) {
  AbiReader reader(args);
  const std::string worker_id = reader.str();
  const crypto::EthAddress controller = reader.address();
  const Bytes msg = reader.bytes();
  const crypto::Signature sig = reader.signature();
  if (!reader.ok() || worker_id.empty()) return revert("bad-args");

  // The SP agent signs registrations after attesting the worker's TEE.
  if (auto gate = attestation_gate(ctx, sp_agent_role(), msg, sig); !gate.ok())
    return revert(gate.error().code == "unknown-role" ? "unknown-role"
                                                      : "attestation-failed");
  if (workers_.contains(worker_id)) return revert("duplicate-worker");

  workers_[worker_id] =
      WorkerRecord{worker_id, controller, true, WorkerStatus::kAvailable};
  role_keys_[worker_role(worker_id)] = controller;
  ctx.emit("worker-registered", AbiWriter().str(worker_id).address(controller).take());
  return Bytes{};
}

Result<Bytes> ServiceProviderContract::worker_lookup(chain::CallContext&) const {
  const auto available = available_workers();
  AbiWriter out;
  out.u32(static_cast<std::uint32_t>(available.size()));
  for (const auto& w : available) out.str(w.worker_id);
  return out.take();
}

Result<Bytes> ServiceProviderContract::deploy(chain::CallContext& ctx,
                                              const Bytes& args) {
  AbiReader reader(args);
  const Hash32 image_cid = reader.fixed32();
  const std::string worker_id = reader.str();
  const Bytes msg = reader.bytes();
  const crypto::Signature sig = reader.signature();
  if (!reader.ok()) return revert("bad-args");

  if (auto gate = attestation_gate(ctx, user_role(ctx.sender()), msg, sig);
      !gate.ok())
    return revert(gate.error().code == "unknown-role" ? "unknown-role"
                                                      : "attestation-failed");

  const auto it = workers_.find(worker_id);
  if (it == workers_.end()) return revert("unknown-worker");
  if (it->second.status != WorkerStatus::kAvailable)
    return revert("worker-unavailable");

  const std::uint64_t id = next_deployment_id_++;
  deployments_[id] = DeploymentRecord{id, ctx.sender(), image_cid, worker_id,
                                      DeploymentState::kPending};
  it->second.status = WorkerStatus::kBusy;
  ctx.emit("orchestrate",
           AbiWriter().u64(id).fixed32(image_cid).str(worker_id).take());
  return AbiWriter().u64(id).take();
}

Result<Bytes> ServiceProviderContract::report_status(chain::CallContext& ctx,
                                                     const Bytes& args) {
  AbiReader reader(args);
  const std::uint64_t deployment_id = reader.u64();
  const auto state = static_cast<DeploymentState>(reader.u8());
  const Bytes msg = reader.bytes();
  const crypto::Signature sig = reader.signature();
  if (!reader.ok()) return revert("bad-args");

  const auto it = deployments_.find(deployment_id);
  if (it == deployments_.end()) return revert("unknown-deployment");

  // Only the assigned worker's agent may report.
  if (auto gate =
          attestation_gate(ctx, worker_role(it->second.worker_id), msg, sig);
      !gate.ok())
    return revert(gate.error().code == "unknown-role" ? "unknown-role"
                                                      : "attestation-failed");

  const DeploymentState from = it->second.state;
  const bool legal =
      (from == DeploymentState::kPending && (state == DeploymentState::kRunning ||
                                             state == DeploymentState::kFailed)) ||
      (from == DeploymentState::kRunning && (state == DeploymentState::kCompleted ||
                                             state == DeploymentState::kFailed));
  if (!legal) return revert("illegal-transition");

  it->second.state = state;
  if (state == DeploymentState::kCompleted || state == DeploymentState::kFailed)
    workers_.at(it->second.worker_id).status = WorkerStatus::kAvailable;
  ctx.emit("status", AbiWriter()
                         .u64(deployment_id)
                         .u8(static_cast<std::uint8_t>(state))
                         .take());
  return Bytes{};
}

std::vector<WorkerRecord> ServiceProviderContract::available_workers() const {
  std::vector<WorkerRecord> out;
  for (const auto& [id, record] : workers_)
    if (record.status == WorkerStatus::kAvailable) out.push_back(record);
  return out;
}

const WorkerRecord* ServiceProviderContract::worker(
    std::string_view worker_id) const {
  const auto it = workers_.find(std::string(worker_id));
  return it == workers_.end() ? nullptr : &it->second;
}

const DeploymentRecord* ServiceProviderContract::deployment(
    std::uint64_t id) const {
  const auto it = deployments_.find(id);
  return it == deployments_.end() ? nullptr : &it->second;
}

int ServiceProviderContract::busy_worker_count() const {
  int count = 0;
  for (const auto& [id, record] : workers_)
    if (record.status == WorkerStatus::kBusy) ++count;
  return count;
}

int ServiceProviderContract::active_deployment_count() const {
  int count = 0;
  for (const auto& [id, record] : deployments_)
    if (record.state == DeploymentState::kPending ||
        record.state == DeploymentState::kRunning)
      ++count;
  return count;
}

std::map<std::string, Bytes> ServiceProviderContract::state_map() const {
  std::map<std::string, Bytes> out;
  out["owner"] = Bytes(owner_.bytes.begin(), owner_.bytes.end());
  out["ra_enabled"] = bool_byte(ra_enabled_);
  out["faithful_replay"] = bool_byte(faithful_replay_);
  Bytes next;
  append_u64be(next, next_deployment_id_);
  out["next_deployment_id"] = std::move(next);
  for (const auto& [role, ea] : role_keys_)
    out["role:" + role] = Bytes(ea.bytes.begin(), ea.bytes.end());
  for (const auto& [id, w] : workers_) {
    AbiWriter record;
    record.address(w.controller_ea)
        .u8(w.attested ? 1 : 0)
        .u8(static_cast<std::uint8_t>(w.status));
    out["worker:" + id] = record.take();
  }
  for (const auto& [id, d] : deployments_) {
    AbiWriter record;
    record.u64(d.deployment_id)
        .address(d.requester)
        .fixed32(d.image_cid)
        .str(d.worker_id)
        .u8(static_cast<std::uint8_t>(d.state));
    out["deployment:" + std::to_string(id)] = record.take();
  }
  Bytes seen;
  for (const auto& h : seen_nonces_) append(seen, h);
  out["seen_nonces"] = std::move(seen);
  return out;
}

}  // namespace teemaf::contracts
