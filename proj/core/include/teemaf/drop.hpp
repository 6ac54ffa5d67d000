// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0
//
// Off-chain side of the resource-orchestration platform: content-addressed
// image storage, worker daemons that watch orchestration events, the
// simulated container lifecycle, and the agent that runs the attestation
// flow and signs every on-chain interaction with the injected key.

#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <optional>

#include "teemaf/cas.hpp"
#include "teemaf/chain.hpp"
#include "teemaf/contracts.hpp"
#include "teemaf/enclave.hpp"
#include "teemaf/sim.hpp"

namespace teemaf::drop {

// ---------------------------------------------------------------- storage

// In-memory content-addressed map; cid = keccak256(content). Reads verify
// the stored bytes still hash to the cid and fail closed if not.
class ContentStore {
 public:
  Hash32 put(Bytes content);
  Result<Bytes> get(const Hash32& cid) const;
  bool contains(const Hash32& cid) const { return blobs_.contains(cid); }
  std::size_t size() const { return blobs_.size(); }

  // Threat hook: flip bits of the stored bytes behind the cid.
  bool corrupt(const Hash32& cid, std::size_t offset, std::uint8_t xor_mask);

 private:
  std::map<Hash32, Bytes> blobs_;
};

// ---------------------------------------------------------- fixture image
//
// Byte layout (all offsets fixed so tampering tests can target fields):
//   0..3   magic "TMAF"
//   4      version (1)
//   5      sid length L
//   6..    sid bytes (L)
//   then   u16be script length S, S script bytes, payload to end
// Script opcodes: 0x01 attest, 0x02 <k> interact k times, 0x03 complete.

inline constexpr std::size_t kImageSidOffset = 6;

Bytes build_fixture_image(std::string_view sid, int interactions, ByteSpan payload);

struct ImageSpec {
  std::string sid;
  bool attests = false;
  int interactions = 0;
  bool completes = false;
  Bytes payload;
};

Result<ImageSpec> parse_fixture_image(ByteSpan image);

// --------------------------------------------------------- container/agent

enum class Lifecycle { kCreated, kAttested, kRunning, kStopped, kFailed };
std::string_view to_string(Lifecycle lifecycle);

struct ContainerInstance {
  std::uint64_t deployment_id = 0;
  enclave::EnclaveHandle handle;
  Lifecycle lifecycle = Lifecycle::kCreated;
  std::string sid;  // from the deployment context, not the launched bytes
  ImageSpec spec;
  std::string failure_reason;
  int interactions_done = 0;

  // Rollback-protected virtual file blocks; monotone in honest runs.
  std::map<int, std::uint64_t> file_block_counters;
};

struct AgentState {
  std::optional<cas::SecretBundle> secrets;
  crypto::EthAddress target_contract;  // only ever set from the bundle
  crypto::EthAddress ea;               // address of the injected key
  std::map<int, std::uint64_t> last_seen_counters;

  // Takes ownership of injected secrets; the signing identity derives
  // from the bundle key and nothing else.
  void install(cas::SecretBundle bundle);
};

class DropWorld;

// One registered off-chain worker: listens for orchestration events with
// gossip lag, instantiates containers, drives their agents, and reports
// status on-chain (retrying until the report commits).
class WorkerDaemon {
 public:
  WorkerDaemon(DropWorld& world, std::string worker_id, int home_node,
               std::uint64_t platform_id, crypto::KeyPair controller_keys);

  const std::string& worker_id() const { return worker_id_; }
  int home_node() const { return home_node_; }
  std::uint64_t platform_id() const { return platform_id_; }
  const crypto::EthAddress& controller_ea() const { return controller_ea_; }

  // Secrets held by the worker's own attested agent (set during setup).
  void install_bundle(cas::SecretBundle bundle);
  bool agent_ready() const { return agent_.secrets.has_value(); }

  void on_block(const chain::Block& block, std::vector<chain::Event> events);

  ContainerInstance* container(std::uint64_t deployment_id);
  const std::map<std::uint64_t, ContainerInstance>& containers() const {
    return containers_;
  }
  std::size_t pending_report_count() const;

 private:
  void handle_orchestration(std::uint64_t deployment_id, const Hash32& cid);
  void attest_and_run(std::uint64_t deployment_id);
  void schedule_interaction(std::uint64_t deployment_id);
  void fail_container(ContainerInstance& c, std::string reason);
  // Reports are serialized per deployment and retried until committed.
  void submit_report(std::uint64_t deployment_id, contracts::DeploymentState state);
  void send_head_report(std::uint64_t deployment_id);
  void check_pending_reports();

  DropWorld& world_;
  std::string worker_id_;
  int home_node_;
  std::uint64_t platform_id_;
  crypto::KeyPair controller_keys_;
  crypto::EthAddress controller_ea_;
  AgentState agent_;

  std::map<std::uint64_t, ContainerInstance> containers_;
  // deployment-scoped agents for the user functions this worker hosts
  std::map<std::uint64_t, AgentState> container_agents_;

  std::map<std::uint64_t, std::deque<contracts::DeploymentState>> report_queue_;
  struct InFlightReport {
    Hash32 tx_id{};
    std::int64_t submitted_ms = 0;
  };
  std::map<std::uint64_t, InFlightReport> in_flight_;
};

// ------------------------------------------------------------------ world

struct WorldConfig {
  std::uint64_t seed = 1;
  chain::ChainConfig chain;
  contracts::ExecutionCosts costs;
  bool ra_enabled = true;
  bool faithful_replay = false;
  std::int64_t attestation_rtt_ms = 30;  // virtual cost of one CAS flow
  std::int64_t interact_interval_ms = 20;
  std::uint32_t platform_firmware = 2;
};

struct UserHandle {
  std::string name;
  crypto::KeyPair owner_keys;
  crypto::EthAddress owner_ea;
  crypto::KeyPair offcf_keys;
  crypto::EthAddress offcf_ea;
  crypto::EthAddress dapp_address;
  std::string sid;
  Hash32 image_cid{};
};

// Assembles chain, contracts, enclaves, CAS, storage, and workers into one
// deterministic simulation driven by the virtual clock.
class DropWorld {
 public:
  explicit DropWorld(WorldConfig config);
  ~DropWorld();

  DropWorld(const DropWorld&) = delete;
  DropWorld& operator=(const DropWorld&) = delete;

  // --- setup (call before running) ---------------------------------
  // Deploys the SP contract and brings up the SP agent through the full
  // attestation flow; registers its role key.
  void setup_sp();

  // Provisions a platform + worker agent, attests it, registers the
  // worker on-chain. Returns the worker id.
  std::string add_worker(int home_node);

  // User-side initialization: DApp contract, RegisterPK, image upload,
  // CAS policy, and the user's role key for deployments.
  UserHandle add_user(std::string_view name, int interactions);

  // Submits OffChainFunctionDeploy for the user's image.
  Hash32 user_deploy(const UserHandle& user, const std::string& worker_id);

  // --- run ----------------------------------------------------------
  void run_until(std::int64_t t_ms);
  // Runs until no pending work remains; returns false if max_ms elapsed.
  bool run_to_quiescence(std::int64_t max_ms = 600'000);
  std::int64_t now() const { return scheduler_.now(); }

  // --- access -------------------------------------------------------
  sim::Scheduler& scheduler() { return scheduler_; }
  chain::ChainSim& chain() { return *chain_; }
  cas::CasService& cas() { return *cas_; }
  enclave::EnclaveHost& enclaves() { return enclave_host_; }
  ContentStore& store() { return store_; }
  enclave::SimulatedAttestationService& attestation_service() { return *attestation_; }
  const WorldConfig& config() const { return config_; }

  enclave::PlatformIdentity& add_platform();
  enclave::PlatformIdentity& platform(std::uint64_t id);

  const crypto::EthAddress& sp_owner_ea() const { return sp_owner_ea_; }
  const crypto::EthAddress& sp_address() const { return sp_address_; }
  contracts::ServiceProviderContract& sp(int node = 0);
  contracts::DAppAttestationContract& dapp(const crypto::EthAddress& address,
                                           int node = 0);
  WorkerDaemon* worker(const std::string& worker_id);
  ContainerInstance* find_container(std::uint64_t deployment_id);

  Rng& keys_rng() { return keys_rng_; }
  Rng& msg_rng() { return msg_rng_; }

  // Threat hook: mutates fetched image bytes after the worker has read
  // its deployment config but before enclave launch (a root-level
  // adversary rewriting the binary in memory).
  void set_image_tamper(std::function<void(Bytes&)> hook) {
    image_tamper_ = std::move(hook);
  }
  const std::function<void(Bytes&)>& image_tamper() const { return image_tamper_; }

  // Used by workers/agents to submit signed calls at the current time.
  Hash32 submit_call(const crypto::EthAddress& sender,
                     const crypto::EthAddress& contract, std::string method,
                     Bytes args, int via_node);

  // One complete attestation flow against the CAS for an already-launched
  // enclave; costs attestation_rtt_ms of virtual time inside schedules.
  Result<cas::SecretBundle> attest_enclave(const std::string& sid,
                                           const enclave::EnclaveHandle& handle,
                                           const enclave::PlatformIdentity& platform);

 private:
  void publish_sealed_blocks();

  WorldConfig config_;
  Rng master_rng_;
  Rng keys_rng_;
  Rng msg_rng_;
  sim::Scheduler scheduler_;

  enclave::EnclaveHost enclave_host_;
  std::map<std::uint64_t, std::unique_ptr<enclave::PlatformIdentity>> platforms_;
  std::uint64_t next_platform_id_ = 1;
  std::unique_ptr<enclave::SimulatedAttestationService> attestation_;
  std::unique_ptr<cas::CasService> cas_;
  ContentStore store_;
  std::unique_ptr<chain::ChainSim> chain_;
  std::int64_t published_height_ = 0;

  crypto::KeyPair sp_owner_keys_;
  crypto::EthAddress sp_owner_ea_;
  crypto::EthAddress sp_address_;
  crypto::KeyPair sp_agent_keys_;
  std::optional<cas::SecretBundle> sp_agent_bundle_;

  std::vector<std::unique_ptr<WorkerDaemon>> workers_;
  int next_worker_ = 1;
  std::int64_t setup_cursor_ms_ = 0;

  std::function<void(Bytes&)> image_tamper_;

  friend class WorkerDaemon;
};

// --------------------------------------------------------------- demo run
//
// The end-to-end happy path of the mutual-attestation protocol, steps 0-7:
// initialization, attestation and injection, then k signed interactions
// verified on-chain. Produces a deterministic line trace.

struct DemoConfig {
  std::uint64_t seed = 1;
  int interactions = 3;
  bool tamper = false;           // flip one image byte before launch
  std::size_t tamper_offset = 0;
  bool faithful_replay = false;
};

struct DemoResult {
  bool success = false;
  std::string failure;
  std::vector<std::string> trace;
};

DemoResult run_demo(const DemoConfig& config);

}  // namespace teemaf::drop
