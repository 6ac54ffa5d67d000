// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#include "teemaf/drop.hpp"

#include <sstream>
#include <stdexcept>

#include "teemaf/keccak.hpp"

namespace teemaf::drop {

using contracts::DAppAttestationContract;
using contracts::DeploymentState;
using contracts::ServiceProviderContract;

// ---------------------------------------------------------------- storage

Hash32 ContentStore::put(Bytes content) {
  const Hash32 cid = crypto::keccak256(content);
  blobs_[cid] = std::move(content);
  return cid;
}

Result<Bytes> ContentStore::get(const Hash32& cid) const {
  const auto it = blobs_.find(cid);
  if (it == blobs_.end()) return Result<Bytes>::failure("not-found");
  if (crypto::keccak256(it->second) != cid)
    return Result<Bytes>::failure("integrity-violation",
                                  "stored bytes no longer hash to cid");
  return it->second;
}

bool ContentStore::corrupt(const Hash32& cid, std::size_t offset,
                           std::uint8_t xor_mask) {
  const auto it = blobs_.find(cid);
  if (it == blobs_.end() || offset >= it->second.size()) return false;
  it->second[offset] ^= xor_mask;
  return true;
}

// ---------------------------------------------------------- fixture image

namespace {
constexpr std::uint8_t kOpAttest = 0x01;
constexpr std::uint8_t kOpInteract = 0x02;
constexpr std::uint8_t kOpComplete = 0x03;
constexpr char kMagic[4] = {'T', 'M', 'A', 'F'};
}  // namespace

Bytes build_fixture_image(std::string_view sid, int interactions,
                          ByteSpan payload) {
  if (sid.size() > 255) throw std::invalid_argument("sid too long");
  Bytes out;
  append(out, std::string_view(kMagic, 4));
  out.push_back(1);  // version
  out.push_back(static_cast<std::uint8_t>(sid.size()));
  append(out, sid);
  Bytes script;
  script.push_back(kOpAttest);
  script.push_back(kOpInteract);
  script.push_back(static_cast<std::uint8_t>(interactions));
  script.push_back(kOpComplete);
  out.push_back(static_cast<std::uint8_t>(script.size() >> 8));
  out.push_back(static_cast<std::uint8_t>(script.size() & 0xff));
  append(out, script);
  append(out, payload);
  return out;
}

Result<ImageSpec> parse_fixture_image(ByteSpan image) {
  const auto fail = [](const char* why) {
    return Result<ImageSpec>::failure("bad-image", why);
  };
  if (image.size() < 8) return fail("truncated header");
  for (int i = 0; i < 4; ++i)
    if (image[i] != static_cast<std::uint8_t>(kMagic[i])) return fail("bad magic");
  if (image[4] != 1) return fail("unsupported version");
  const std::size_t sid_len = image[5];
  if (image.size() < kImageSidOffset + sid_len + 2) return fail("truncated sid");
  ImageSpec spec;
  spec.sid.assign(image.begin() + kImageSidOffset,
                  image.begin() + kImageSidOffset + sid_len);
  std::size_t pos = kImageSidOffset + sid_len;
  const std::size_t script_len = (std::size_t(image[pos]) << 8) | image[pos + 1];
  pos += 2;
  if (image.size() < pos + script_len) return fail("truncated script");
  const std::size_t script_end = pos + script_len;
  while (pos < script_end) {
    switch (image[pos]) {
      case kOpAttest:
        spec.attests = true;
        ++pos;
        break;
      case kOpInteract:
        if (pos + 1 >= script_end) return fail("truncated interact op");
        spec.interactions = image[pos + 1];
        pos += 2;
        break;
      case kOpComplete:
        spec.completes = true;
        ++pos;
        break;
      default:
        return fail("unknown opcode");
    }
  }
  spec.payload.assign(image.begin() + script_end, image.end());
  return spec;
}

void AgentState::install(cas::SecretBundle bundle) {
  target_contract = bundle.sca_dapp;
  const auto kp = crypto::keypair_from_sk(bundle.sk_offcf);
  if (kp.ok()) ea = crypto::derive_address(kp.value().pk).value();
  secrets = std::move(bundle);
}

std::string_view to_string(Lifecycle lifecycle) {
  switch (lifecycle) {
    case Lifecycle::kCreated: return "created";
    case Lifecycle::kAttested: return "attested";
    case Lifecycle::kRunning: return "running";
    case Lifecycle::kStopped: return "stopped";
    case Lifecycle::kFailed: return "failed";
  }
  return "unknown";
}

// ----------------------------------------------------------- worker daemon

WorkerDaemon::WorkerDaemon(DropWorld& world, std::string worker_id, int home_node,
                           std::uint64_t platform_id,
                           crypto::KeyPair controller_keys)
    : world_(world),
      worker_id_(std::move(worker_id)),
      home_node_(home_node),
      platform_id_(platform_id),
      controller_keys_(std::move(controller_keys)) {
  controller_ea_ = crypto::derive_address(controller_keys_.pk).value();
}

void WorkerDaemon::install_bundle(cas::SecretBundle bundle) {
  agent_.install(std::move(bundle));
}

ContainerInstance* WorkerDaemon::container(std::uint64_t deployment_id) {
  const auto it = containers_.find(deployment_id);
  return it == containers_.end() ? nullptr : &it->second;
}

void WorkerDaemon::on_block(const chain::Block& block,
                            std::vector<chain::Event> events) {
  (void)block;
  check_pending_reports();
  for (const auto& event : events) {
    if (event.name != "orchestrate") continue;
    contracts::AbiReader reader(event.data);
    const std::uint64_t deployment_id = reader.u64();
    const Hash32 cid = reader.fixed32();
    const std::string target_worker = reader.str();
    if (!reader.ok() || target_worker != worker_id_) continue;  // not addressed here
    handle_orchestration(deployment_id, cid);
  }
}

void WorkerDaemon::handle_orchestration(std::uint64_t deployment_id,
                                        const Hash32& cid) {
  if (containers_.contains(deployment_id)) return;
  ContainerInstance c;
  c.deployment_id = deployment_id;

  auto fetched = world_.store().get(cid);
  if (!fetched.ok()) {
    c.lifecycle = Lifecycle::kFailed;
    c.failure_reason = fetched.error().code;
    containers_[deployment_id] = std::move(c);
    submit_report(deployment_id, DeploymentState::kFailed);
    return;
  }
  Bytes image_bytes = std::move(fetched).value();

  // Deployment config (the sid) is read from the verified bytes before
  // any in-memory tampering can occur.
  auto spec = parse_fixture_image(image_bytes);
  if (!spec.ok()) {
    c.lifecycle = Lifecycle::kFailed;
    c.failure_reason = spec.error().code;
    containers_[deployment_id] = std::move(c);
    submit_report(deployment_id, DeploymentState::kFailed);
    return;
  }
  c.spec = std::move(spec).value();
  c.sid = c.spec.sid;

  if (world_.image_tamper()) world_.image_tamper()(image_bytes);

  c.handle = world_.enclaves().launch(enclave::EnclaveImage::from_code(image_bytes),
                                      world_.platform(platform_id_));
  c.lifecycle = Lifecycle::kCreated;
  for (int i = 0; i < 3; ++i) c.file_block_counters[i] = 0;
  containers_[deployment_id] = std::move(c);

  const auto dep = deployment_id;
  world_.scheduler().at(world_.now() + world_.config().attestation_rtt_ms,
                        [this, dep] { attest_and_run(dep); });
}

void WorkerDaemon::attest_and_run(std::uint64_t deployment_id) {
  ContainerInstance* c = container(deployment_id);
  if (!c || c->lifecycle != Lifecycle::kCreated) return;

  auto bundle =
      world_.attest_enclave(c->sid, c->handle, world_.platform(platform_id_));
  if (!bundle.ok()) {
    fail_container(*c, bundle.error().code);
    return;
  }
  c->lifecycle = Lifecycle::kAttested;
  AgentState agent;
  agent.install(std::move(bundle).value());
  container_agents_[deployment_id] = std::move(agent);

  submit_report(deployment_id, DeploymentState::kRunning);
  schedule_interaction(deployment_id);
}

void WorkerDaemon::schedule_interaction(std::uint64_t deployment_id) {
  world_.scheduler().at(world_.now() + world_.config().interact_interval_ms,
                        [this, deployment_id] {
    ContainerInstance* c = container(deployment_id);
    if (!c) return;
    if (c->lifecycle != Lifecycle::kAttested && c->lifecycle != Lifecycle::kRunning)
      return;
    c->lifecycle = Lifecycle::kRunning;
    AgentState& agent = container_agents_.at(deployment_id);

    // Rollback protection: any regression of a file-block counter kills
    // the container.
    for (const auto& [blockidx, seen] : agent.last_seen_counters) {
      if (c->file_block_counters[blockidx] < seen) {
        world_.enclaves().terminate(c->handle);
        fail_container(*c, "rollback-detected");
        return;
      }
    }

    if (c->interactions_done < c->spec.interactions) {
      const Bytes msg = world_.msg_rng().bytes(32);
      const auto sig = crypto::sign(msg, agent.secrets->sk_offcf).value();
      world_.submit_call(agent.ea, agent.target_contract,
                         "OffChainFunctionSignatureVerify",
                         DAppAttestationContract::verify_args(msg, sig),
                         home_node_);
      const int slot = c->interactions_done % 3;
      c->file_block_counters[slot] += 1;
      agent.last_seen_counters[slot] = c->file_block_counters[slot];
      c->interactions_done += 1;
      schedule_interaction(deployment_id);
      return;
    }

    c->lifecycle = Lifecycle::kStopped;
    world_.enclaves().terminate(c->handle);
    submit_report(deployment_id, DeploymentState::kCompleted);
  });
}

void WorkerDaemon::fail_container(ContainerInstance& c, std::string reason) {
  c.lifecycle = Lifecycle::kFailed;
  c.failure_reason = std::move(reason);
  submit_report(c.deployment_id, DeploymentState::kFailed);
}

void WorkerDaemon::submit_report(std::uint64_t deployment_id,
                                 DeploymentState state) {
  report_queue_[deployment_id].push_back(state);
  if (!in_flight_.contains(deployment_id)) send_head_report(deployment_id);
}

void WorkerDaemon::send_head_report(std::uint64_t deployment_id) {
  auto& queue = report_queue_[deployment_id];
  if (queue.empty()) return;
  const DeploymentState state = queue.front();
  const Bytes msg = world_.msg_rng().bytes(32);
  const auto sig = crypto::sign(msg, agent_.secrets->sk_offcf).value();
  const Hash32 tx = world_.submit_call(
      controller_ea_, world_.sp_address(), "ReportStatus",
      ServiceProviderContract::report_status_args(deployment_id, state, msg, sig),
      home_node_);
  in_flight_[deployment_id] = InFlightReport{tx, world_.now()};
}

void WorkerDaemon::check_pending_reports() {
  std::vector<std::uint64_t> done;
  for (auto& [deployment_id, flight] : in_flight_) {
    const auto* info = world_.chain().commit_info(flight.tx_id);
    if (info && !info->reverted) {
      report_queue_[deployment_id].pop_front();
      done.push_back(deployment_id);
      continue;
    }
    const bool lost = !info && world_.now() - flight.submitted_ms >=
                                   2 * world_.config().chain.block_time_ms;
    // reverted out-of-order reports are retried; the queue order makes
    // them legal once the predecessor lands
    if (lost || (info && info->reverted)) {
      send_head_report(deployment_id);
    }
  }
  for (const auto dep : done) {
    in_flight_.erase(dep);
    if (!report_queue_[dep].empty())
      send_head_report(dep);
    else
      report_queue_.erase(dep);
  }
}

std::size_t WorkerDaemon::pending_report_count() const {
  std::size_t n = 0;
  for (const auto& [dep, queue] : report_queue_) n += queue.size();
  return n;
}

// ------------------------------------------------------------------ world

DropWorld::DropWorld(WorldConfig config)
    : config_(config),
      master_rng_(config.seed),
      keys_rng_(master_rng_.fork("keys")),
      msg_rng_(master_rng_.fork("msg-random")) {
  attestation_ = std::make_unique<enclave::SimulatedAttestationService>(
      enclave::PlatformRegistry{});
  cas_ = std::make_unique<cas::CasService>(*attestation_,
                                           master_rng_.fork("cas-nonce"));
  chain_ = std::make_unique<chain::ChainSim>(config_.chain);
}

DropWorld::~DropWorld() = default;

enclave::PlatformIdentity& DropWorld::add_platform() {
  const std::uint64_t id = next_platform_id_++;
  auto platform = std::make_unique<enclave::PlatformIdentity>(
      enclave::PlatformIdentity::provision(id, keys_rng_, config_.platform_firmware));
  attestation_->registry().enroll(*platform, config_.platform_firmware);
  auto& ref = *platform;
  platforms_[id] = std::move(platform);
  return ref;
}

enclave::PlatformIdentity& DropWorld::platform(std::uint64_t id) {
  return *platforms_.at(id);
}

contracts::ServiceProviderContract& DropWorld::sp(int node) {
  auto* c = dynamic_cast<contracts::ServiceProviderContract*>(
      chain_->contract(node, sp_address_));
  if (!c) throw std::runtime_error("sp contract not deployed");
  return *c;
}

contracts::DAppAttestationContract& DropWorld::dapp(
    const crypto::EthAddress& address, int node) {
  auto* c = dynamic_cast<contracts::DAppAttestationContract*>(
      chain_->contract(node, address));
  if (!c) throw std::runtime_error("dapp contract not deployed");
  return *c;
}

WorkerDaemon* DropWorld::worker(const std::string& worker_id) {
  for (auto& w : workers_)
    if (w->worker_id() == worker_id) return w.get();
  return nullptr;
}

ContainerInstance* DropWorld::find_container(std::uint64_t deployment_id) {
  for (auto& w : workers_)
    if (auto* c = w->container(deployment_id)) return c;
  return nullptr;
}

Hash32 DropWorld::submit_call(const crypto::EthAddress& sender,
                              const crypto::EthAddress& contract,
                              std::string method, Bytes args, int via_node) {
  chain::Transaction tx;
  tx.sender = sender;
  tx.contract = contract;
  tx.method = std::move(method);
  tx.args = std::move(args);
  return chain_->submit(std::move(tx), via_node, scheduler_.now());
}

Result<cas::SecretBundle> DropWorld::attest_enclave(
    const std::string& sid, const enclave::EnclaveHandle& handle,
    const enclave::PlatformIdentity& platform) {
  auto session = cas_->begin_session(sid, scheduler_.now());
  if (!session.ok())
    return Result<cas::SecretBundle>::failure(session.error().code,
                                              session.error().detail);
  const Hash32 binding = cas::endpoint_binding(sid, handle.id);
  auto report = enclave_host_.ereport(
      handle, cas::make_report_data(session.value().nonce, binding));
  if (!report.ok())
    return Result<cas::SecretBundle>::failure(report.error().code,
                                              report.error().detail);
  auto quote = enclave::las_quote(report.value(), platform);
  if (!quote.ok())
    return Result<cas::SecretBundle>::failure(quote.error().code,
                                              quote.error().detail);
  auto outcome = cas_->verify_and_inject(session.value().session_id,
                                         quote.value(), scheduler_.now());
  if (!outcome.ok())
    return Result<cas::SecretBundle>::failure(outcome.error().code,
                                              outcome.error().detail);
  if (std::holds_alternative<cas::Refusal>(outcome.value())) {
    const auto& refusal = std::get<cas::Refusal>(outcome.value());
    return Result<cas::SecretBundle>::failure(refusal.code, refusal.detail);
  }
  // TLS stand-in: deliver only to the endpoint bound into the quote.
  return cas::deliver(std::get<cas::InjectionGrant>(outcome.value()), binding);
}

void DropWorld::setup_sp() {
  sp_owner_keys_ = crypto::keygen(keys_rng_);
  sp_owner_ea_ = crypto::derive_address(sp_owner_keys_.pk).value();
  sp_address_ = contracts::contract_address("sc-sp");
  const auto costs = config_.costs;
  const auto owner = sp_owner_ea_;
  const bool ra = config_.ra_enabled;
  const bool faithful = config_.faithful_replay;
  chain_->deploy(sp_address_, [owner, costs, ra, faithful] {
    return std::make_unique<contracts::ServiceProviderContract>(owner, costs, ra,
                                                                faithful);
  });

  // The SP's own off-chain function goes through the full flow before it
  // may sign anything.
  sp_agent_keys_ = crypto::keygen(keys_rng_);
  const Bytes image_bytes =
      build_fixture_image("sp-agent", 0, to_bytes("sp-agent"));
  const auto image = enclave::EnclaveImage::from_code(image_bytes);
  cas::Policy policy;
  policy.sid = "sp-agent";
  policy.mre = image.mre;
  policy.secrets[std::string(cas::kSecretSk)] =
      Bytes(sp_agent_keys_.sk.begin(), sp_agent_keys_.sk.end());
  policy.secrets[std::string(cas::kSecretSca)] =
      Bytes(sp_address_.bytes.begin(), sp_address_.bytes.end());
  policy.owner = sp_owner_ea_;
  if (auto r = cas_->register_policy(policy); !r.ok())
    throw std::runtime_error("sp policy rejected: " + r.error().code);

  auto& platform = add_platform();
  const auto handle = enclave_host_.launch(image, platform);
  setup_cursor_ms_ += config_.attestation_rtt_ms;
  scheduler_.run_until(setup_cursor_ms_);
  auto bundle = attest_enclave("sp-agent", handle, platform);
  if (!bundle.ok())
    throw std::runtime_error("sp agent attestation failed: " + bundle.error().code);
  sp_agent_bundle_ = std::move(bundle).value();

  const auto agent_ea = crypto::derive_address(sp_agent_keys_.pk).value();
  submit_call(sp_owner_ea_, sp_address_, "RegisterRoleKey",
              ServiceProviderContract::register_role_key_args(
                  contracts::sp_agent_role(), agent_ea),
              0);
}

std::string DropWorld::add_worker(int home_node) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "w%03d", next_worker_++);
  const std::string worker_id = buf;

  const auto controller = crypto::keygen(keys_rng_);
  const auto controller_ea = crypto::derive_address(controller.pk).value();
  auto& platform = add_platform();

  // The worker hosts the SP's worker agent as an attested container of
  // its own; its key arrives only through the CAS.
  const std::string sid = "sp-worker-" + worker_id;
  const Bytes image_bytes = build_fixture_image(sid, 0, to_bytes(worker_id));
  const auto image = enclave::EnclaveImage::from_code(image_bytes);
  cas::Policy policy;
  policy.sid = sid;
  policy.mre = image.mre;
  policy.secrets[std::string(cas::kSecretSk)] =
      Bytes(controller.sk.begin(), controller.sk.end());
  policy.secrets[std::string(cas::kSecretSca)] =
      Bytes(sp_address_.bytes.begin(), sp_address_.bytes.end());
  policy.owner = sp_owner_ea_;
  if (auto r = cas_->register_policy(policy); !r.ok())
    throw std::runtime_error("worker policy rejected: " + r.error().code);

  const auto handle = enclave_host_.launch(image, platform);
  setup_cursor_ms_ += config_.attestation_rtt_ms;
  scheduler_.run_until(setup_cursor_ms_);
  auto bundle = attest_enclave(sid, handle, platform);
  if (!bundle.ok())
    throw std::runtime_error("worker agent attestation failed: " +
                             bundle.error().code);

  auto daemon = std::make_unique<WorkerDaemon>(*this, worker_id, home_node,
                                               platform.platform_id(), controller);
  daemon->install_bundle(std::move(bundle).value());
  workers_.push_back(std::move(daemon));

  const Bytes msg = msg_rng_.bytes(32);
  const auto sig = crypto::sign(msg, sp_agent_keys_.sk).value();
  const auto agent_ea = crypto::derive_address(sp_agent_keys_.pk).value();
  submit_call(agent_ea, sp_address_, "OffChainWorkerRegister",
              ServiceProviderContract::worker_register_args(worker_id,
                                                            controller_ea, msg, sig),
              0);
  return worker_id;
}

UserHandle DropWorld::add_user(std::string_view name, int interactions) {
  UserHandle user;
  user.name = std::string(name);
  user.owner_keys = crypto::keygen(keys_rng_);
  user.owner_ea = crypto::derive_address(user.owner_keys.pk).value();
  user.offcf_keys = crypto::keygen(keys_rng_);
  user.offcf_ea = crypto::derive_address(user.offcf_keys.pk).value();
  user.dapp_address = contracts::contract_address("dapp-" + user.name);
  user.sid = "user-" + user.name;

  const auto owner = user.owner_ea;
  const auto costs = config_.costs;
  const bool faithful = config_.faithful_replay;
  chain_->deploy(user.dapp_address, [owner, costs, faithful] {
    return std::make_unique<contracts::DAppAttestationContract>(owner, costs,
                                                                faithful);
  });
  submit_call(user.owner_ea, user.dapp_address, "RegisterPK",
              DAppAttestationContract::register_pk_args(user.offcf_ea), 0);

  const Bytes image_bytes =
      build_fixture_image(user.sid, interactions, to_bytes(user.name));
  user.image_cid = store_.put(image_bytes);

  cas::Policy policy;
  policy.sid = user.sid;
  policy.mre = enclave::measure(image_bytes);
  policy.secrets[std::string(cas::kSecretSk)] =
      Bytes(user.offcf_keys.sk.begin(), user.offcf_keys.sk.end());
  policy.secrets[std::string(cas::kSecretSca)] =
      Bytes(user.dapp_address.bytes.begin(), user.dapp_address.bytes.end());
  policy.owner = user.owner_ea;
  if (auto r = cas_->register_policy(policy); !r.ok())
    throw std::runtime_error("user policy rejected: " + r.error().code);

  submit_call(sp_owner_ea_, sp_address_, "RegisterRoleKey",
              ServiceProviderContract::register_role_key_args(
                  contracts::user_role(user.owner_ea), user.owner_ea),
              0);
  return user;
}

Hash32 DropWorld::user_deploy(const UserHandle& user, const std::string& worker_id) {
  const Bytes msg = msg_rng_.bytes(32);
  const auto sig = crypto::sign(msg, user.owner_keys.sk).value();
  return submit_call(user.owner_ea, sp_address_, "OffChainFunctionDeploy",
                     ServiceProviderContract::deploy_args(user.image_cid,
                                                          worker_id, msg, sig),
                     0);
}

void DropWorld::publish_sealed_blocks() {
  const auto& blocks = chain_->blocks();
  const auto& log = chain_->events(0);
  while (published_height_ < static_cast<std::int64_t>(blocks.size())) {
    const chain::Block& block = blocks[published_height_];
    ++published_height_;
    std::vector<chain::Event> block_events;
    for (const auto& e : log)
      if (e.height == block.height) block_events.push_back(e);
    for (auto& worker : workers_) {
      const std::int64_t lag =
          config_.chain.gossip_delay_ms *
          chain_->hops(block.sealer_id, worker->home_node());
      WorkerDaemon* w = worker.get();
      scheduler_.at(block.timestamp_ms + lag,
                    [w, block, block_events] { w->on_block(block, block_events); });
    }
  }
}

void DropWorld::run_until(std::int64_t t_ms) {
  while (chain_->next_seal_time_ms() <= t_ms) {
    const std::int64_t seal_t = chain_->next_seal_time_ms();
    scheduler_.run_until(seal_t);
    chain_->seal_until(seal_t);
    publish_sealed_blocks();
  }
  scheduler_.run_until(t_ms);
}

bool DropWorld::run_to_quiescence(std::int64_t max_ms) {
  const std::int64_t deadline = now() + max_ms;
  while (now() < deadline) {
    // Drain everything scheduled before the next seal tick (worker
    // callbacks, interactions) so the quiet check sees real work only.
    scheduler_.run_until(chain_->next_seal_time_ms() - 1);
    std::size_t pending_reports = 0;
    for (const auto& w : workers_) pending_reports += w->pending_report_count();
    if (scheduler_.empty() && chain_->pools_empty() && pending_reports == 0)
      return true;
    run_until(chain_->next_seal_time_ms());
  }
  return false;
}

// --------------------------------------------------------------- demo run

namespace {

std::string step_line(int step, const std::string& text) {
  return "step=" + std::to_string(step) + " " + text;
}

}  // namespace

DemoResult run_demo(const DemoConfig& config) {
  DemoResult result;
  auto trace = [&result](int step, const std::string& text) {
    result.trace.push_back(step_line(step, text));
  };

  Rng master(config.seed);
  Rng keys = master.fork("keys");
  Rng msgs = master.fork("msg-random");

  // step 0: initialization by the DApp owner
  const auto do_keys = crypto::keygen(keys);
  const auto do_ea = crypto::derive_address(do_keys.pk).value();
  const auto offcf_keys = crypto::keygen(keys);
  const auto offcf_ea = crypto::derive_address(offcf_keys.pk).value();

  chain::ChainSim sim({.node_count = 1, .block_time_ms = 1000});
  const auto sca = contracts::contract_address("demo-dapp");
  const bool faithful = config.faithful_replay;
  sim.deploy(sca, [do_ea, faithful] {
    return std::make_unique<DAppAttestationContract>(
        do_ea, contracts::ExecutionCosts{}, faithful);
  });
  sim.submit({.sender = do_ea,
              .contract = sca,
              .method = "RegisterPK",
              .args = DAppAttestationContract::register_pk_args(offcf_ea)},
             0, 0);
  sim.seal_until(1000);

  Bytes image_bytes = build_fixture_image("demo-offcf", config.interactions,
                                          to_bytes("demo-payload"));
  const auto clean_mre = enclave::measure(image_bytes);

  enclave::PlatformRegistry registry;
  Rng hw = master.fork("hardware");
  auto platform = enclave::PlatformIdentity::provision(1, hw, 1);
  registry.enroll(platform, 1);
  enclave::SimulatedAttestationService attestation(std::move(registry));
  cas::CasService cas_service(attestation, master.fork("cas-nonce"));

  cas::Policy policy;
  policy.sid = "demo-offcf";
  policy.mre = clean_mre;
  policy.secrets[std::string(cas::kSecretSk)] =
      Bytes(offcf_keys.sk.begin(), offcf_keys.sk.end());
  policy.secrets[std::string(cas::kSecretSca)] =
      Bytes(sca.bytes.begin(), sca.bytes.end());
  policy.owner = do_ea;
  if (!cas_service.register_policy(policy).ok())
    throw std::runtime_error("demo policy rejected");

  trace(0, "init registered_ea=" + offcf_ea.hex() + " sid=" + policy.sid +
               " mre=" + to_hex(clean_mre) + " sca=" + sca.hex());

  if (config.tamper) {
    const std::size_t off = config.tamper_offset % image_bytes.size();
    image_bytes[off] ^= 0x01;
    trace(0, "tamper offset=" + std::to_string(off));
  }

  enclave::EnclaveHost host;
  const auto handle =
      host.launch(enclave::EnclaveImage::from_code(image_bytes), platform);

  // steps 1-6: attestation and injection
  std::int64_t now = 1000;
  const auto session = cas_service.begin_session("demo-offcf", now).value();
  trace(1, "session id=" + std::to_string(session.session_id) +
               " nonce=" + to_hex(session.nonce));
  const auto binding = cas::endpoint_binding("demo-offcf", handle.id);
  const auto report =
      host.ereport(handle, cas::make_report_data(session.nonce, binding)).value();
  trace(2, "ereport mre=" + to_hex(report.mre));
  const auto quote = enclave::las_quote(report, platform).value();
  trace(3, "quote signed platform=" + std::to_string(quote.report.platform_id));
  trace(4, "quote forwarded to attestation service");
  const auto avr = attestation.verify(quote);
  trace(5, std::string("avr positive=") + (avr.positive ? "1" : "0") +
               " reason=" + std::string(enclave::to_string(avr.reason)));

  const auto outcome =
      cas_service.verify_and_inject(session.session_id, quote, now).value();
  if (std::holds_alternative<cas::Refusal>(outcome)) {
    const auto& refusal = std::get<cas::Refusal>(outcome);
    result.failure = refusal.code;
    trace(6, "injection refused reason=" + refusal.code);
    return result;
  }
  const auto bundle =
      cas::deliver(std::get<cas::InjectionGrant>(outcome), binding).value();
  trace(6, "secrets injected sca=" + bundle.sca_dapp.hex());

  // step 7: signed interactions, verified on-chain
  int verified = 0;
  for (int i = 0; i < config.interactions; ++i) {
    const Bytes msg = msgs.bytes(32);
    const auto sig = crypto::sign(msg, bundle.sk_offcf).value();
    now += 10;
    sim.submit({.sender = offcf_ea,
                .contract = bundle.sca_dapp,
                .method = "OffChainFunctionSignatureVerify",
                .args = DAppAttestationContract::verify_args(msg, sig)},
               0, now);
  }
  sim.seal_until(((now / 1000) + 1) * 1000);
  for (const auto& event : sim.events(0)) {
    if (event.name != "verified") continue;
    const bool accepted = !event.data.empty() && event.data[0] == 1;
    trace(7, std::string("interaction verified=") + (accepted ? "1" : "0"));
    if (accepted) ++verified;
  }

  if (verified == config.interactions) {
    result.success = true;
    trace(7, "isAttested=1 interactions=" + std::to_string(verified));
  } else {
    result.failure = "on-chain-verification-failed";
    trace(7, "isAttested=0 verified=" + std::to_string(verified) + "/" +
                 std::to_string(config.interactions));
  }
  return result;
}

}  // namespace teemaf::drop
