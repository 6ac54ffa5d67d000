// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#include "teemaf/threats.hpp"

#include <json.hpp>

#include "teemaf/drop.hpp"

namespace teemaf::threats {

using contracts::DeploymentState;

std::string_view to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::kTamperImage: return "tamper-image";
    case AdversaryKind::kReplayQuote: return "replay-quote";
    case AdversaryKind::kReplaySignature: return "replay-signature";
    case AdversaryKind::kRollbackState: return "rollback-state";
    case AdversaryKind::kFirmwareRollback: return "firmware-rollback";
    case AdversaryKind::kUnauthorizedChannel: return "unauthorized-channel";
    case AdversaryKind::kMalformedMessage: return "malformed-message";
  }
  return "unknown";
}

Result<AdversaryKind> kind_from_string(std::string_view name) {
  for (const auto kind :
       {AdversaryKind::kTamperImage, AdversaryKind::kReplayQuote,
        AdversaryKind::kReplaySignature, AdversaryKind::kRollbackState,
        AdversaryKind::kFirmwareRollback, AdversaryKind::kUnauthorizedChannel,
        AdversaryKind::kMalformedMessage}) {
    if (to_string(kind) == name) return kind;
  }
  return Result<AdversaryKind>::failure("unknown-kind", std::string(name));
}

std::string AdversaryScript::to_json() const {
  const nlohmann::json j{{"kind", std::string(to_string(kind))},
                         {"seed", seed},
                         {"byte_offset", byte_offset},
                         {"counter_delta", counter_delta}};
  return j.dump();
}

std::string ScenarioOutcome::to_json() const {
  const nlohmann::json j{{"kind", std::string(to_string(kind))},
                         {"defense_fired", defense_fired},
                         {"defense", defense},
                         {"detail", detail},
                         {"final_state", final_state}};
  return j.dump();
}

namespace {

drop::WorldConfig scenario_world_config(std::uint64_t seed) {
  drop::WorldConfig cfg;
  cfg.seed = seed;
  cfg.chain = {.node_count = 2,
               .block_time_ms = 1000,
               .block_capacity = 50,
               .gossip_delay_ms = 50};
  return cfg;
}

// System-software adversary: root access rewrites the fetched image in
// memory before launch; the policy measurement no longer matches.
ScenarioOutcome run_tamper_image(const AdversaryScript& script) {
  ScenarioOutcome outcome;
  outcome.kind = script.kind;

  drop::DropWorld world(scenario_world_config(script.seed));
  world.setup_sp();
  const auto worker = world.add_worker(0);
  const auto user = world.add_user("victim", 2);
  world.run_until(2000);
  world.set_image_tamper([&script](Bytes& image) {
    image[script.byte_offset % image.size()] ^= 0x01;
  });
  world.user_deploy(user, worker);
  if (!world.run_to_quiescence()) {
    outcome.detail = "simulation did not quiesce";
    return outcome;
  }

  const auto* container = world.find_container(1);
  const auto* dep = world.sp().deployment(1);
  if (container && dep) {
    outcome.defense = container->failure_reason;
    outcome.final_state = std::string(contracts::to_string(dep->state));
    outcome.defense_fired = container->failure_reason == "mre-mismatch" &&
                            dep->state == DeploymentState::kFailed &&
                            container->lifecycle == drop::Lifecycle::kFailed;
    outcome.detail = "secrets withheld, container never ran";
  }
  return outcome;
}

// A captured quote is replayed against a fresh session; the session nonce
// embedded in report_data no longer matches.
ScenarioOutcome run_replay_quote(const AdversaryScript& script) {
  ScenarioOutcome outcome;
  outcome.kind = script.kind;

  Rng rng(script.seed);
  auto platform = enclave::PlatformIdentity::provision(1, rng, 2);
  enclave::PlatformRegistry registry;
  registry.enroll(platform, 2);
  enclave::SimulatedAttestationService service(std::move(registry));
  cas::CasService cas(service, rng.fork("cas"));

  const auto image = enclave::EnclaveImage::from_code(rng.bytes(96));
  cas::Policy policy;
  policy.sid = "svc";
  policy.mre = image.mre;
  policy.secrets[std::string(cas::kSecretSk)] = Bytes(32, 0x01);
  policy.secrets[std::string(cas::kSecretSca)] = Bytes(20, 0x02);
  if (!cas.register_policy(policy).ok()) return outcome;

  enclave::EnclaveHost host;
  const auto handle = host.launch(image, platform);
  const auto binding = cas::endpoint_binding("svc", handle.id);

  // honest session A: quote captured off the wire
  const auto session_a = cas.begin_session("svc", 0).value();
  const auto report =
      host.ereport(handle, cas::make_report_data(session_a.nonce, binding)).value();
  const auto quote = enclave::las_quote(report, platform).value();
  const auto first = cas.verify_and_inject(session_a.session_id, quote, 1);
  if (!first.ok() || !std::holds_alternative<cas::InjectionGrant>(first.value()))
    return outcome;  // honest path must succeed for the replay to mean anything

  // adversary opens session B and replays the captured quote
  const auto session_b = cas.begin_session("svc", 2).value();
  const auto replay = cas.verify_and_inject(session_b.session_id, quote, 3);
  if (replay.ok() && std::holds_alternative<cas::Refusal>(replay.value())) {
    const auto& refusal = std::get<cas::Refusal>(replay.value());
    outcome.defense = refusal.code;
    outcome.defense_fired = refusal.code == "nonce-mismatch";
    outcome.detail = "stale freshness nonce rejected";
  }
  return outcome;
}

// Rollback adversary: a protected file block counter regresses mid-run;
// the agent terminates the container at its next interaction.
ScenarioOutcome run_rollback_state(const AdversaryScript& script) {
  ScenarioOutcome outcome;
  outcome.kind = script.kind;

  drop::DropWorld world(scenario_world_config(script.seed));
  world.setup_sp();
  const auto worker = world.add_worker(0);
  const auto user = world.add_user("victim", 8);
  world.run_until(2000);
  world.user_deploy(user, worker);

  // let a few interactions land, then roll a block counter back
  world.run_until(3100);
  auto* container = world.find_container(1);
  if (!container || container->file_block_counters[0] == 0) {
    outcome.detail = "container not running yet";
    return outcome;
  }
  const auto delta =
      std::min<std::uint64_t>(script.counter_delta, container->file_block_counters[0]);
  container->file_block_counters[0] -= delta;

  if (!world.run_to_quiescence()) {
    outcome.detail = "simulation did not quiesce";
    return outcome;
  }
  const auto* dep = world.sp().deployment(1);
  outcome.defense = world.find_container(1)->failure_reason;
  outcome.final_state = dep ? std::string(contracts::to_string(dep->state)) : "";
  outcome.defense_fired = outcome.defense == "rollback-detected" && dep &&
                          dep->state == DeploymentState::kFailed;
  outcome.detail = "execution terminated on counter regression";
  return outcome;
}

// Firmware rollback: the platform re-flashes an older version; its
// attestation key changes and the report's version is below the
// registry minimum.
ScenarioOutcome run_firmware_rollback(const AdversaryScript& script) {
  ScenarioOutcome outcome;
  outcome.kind = script.kind;

  Rng rng(script.seed);
  const std::uint32_t fw = 5;
  auto platform = enclave::PlatformIdentity::provision(1, rng, fw);
  enclave::PlatformRegistry registry;
  registry.enroll(platform, fw);

  const auto downgraded =
      fw > script.counter_delta ? fw - std::uint32_t(script.counter_delta) : 0;
  platform.set_firmware_version(downgraded);

  enclave::EnclaveHost host;
  const auto image = enclave::EnclaveImage::from_code(rng.bytes(64));
  const auto handle = host.launch(image, platform);
  const auto report = host.ereport(handle, ByteArray<64>{}).value();
  const auto quote = enclave::las_quote(report, platform).value();
  const auto avr = verify_quote(quote, registry);

  outcome.defense = std::string(enclave::to_string(avr.reason));
  outcome.defense_fired =
      !avr.positive && avr.reason == enclave::AvrReason::kStaleFirmware;
  outcome.detail = "quote from downgraded firmware rejected";
  return outcome;
}

// Network adversary redirects an injection to an endpoint that was not
// attested; the authenticated channel refuses delivery.
ScenarioOutcome run_unauthorized_channel(const AdversaryScript& script) {
  ScenarioOutcome outcome;
  outcome.kind = script.kind;

  Rng rng(script.seed);
  auto platform = enclave::PlatformIdentity::provision(1, rng, 2);
  enclave::PlatformRegistry registry;
  registry.enroll(platform, 2);
  enclave::SimulatedAttestationService service(std::move(registry));
  cas::CasService cas(service, rng.fork("cas"));

  const auto image = enclave::EnclaveImage::from_code(rng.bytes(80));
  cas::Policy policy;
  policy.sid = "svc";
  policy.mre = image.mre;
  policy.secrets[std::string(cas::kSecretSk)] = Bytes(32, 0x0A);
  policy.secrets[std::string(cas::kSecretSca)] = Bytes(20, 0x0B);
  if (!cas.register_policy(policy).ok()) return outcome;

  enclave::EnclaveHost host;
  const auto handle = host.launch(image, platform);
  const auto binding = cas::endpoint_binding("svc", handle.id);
  const auto session = cas.begin_session("svc", 0).value();
  const auto report =
      host.ereport(handle, cas::make_report_data(session.nonce, binding)).value();
  const auto quote = enclave::las_quote(report, platform).value();
  const auto gate = cas.verify_and_inject(session.session_id, quote, 1);
  if (!gate.ok() || !std::holds_alternative<cas::InjectionGrant>(gate.value()))
    return outcome;

  Hash32 rogue_endpoint = binding;
  rogue_endpoint[5] ^= 0x01;
  const auto delivery =
      cas::deliver(std::get<cas::InjectionGrant>(gate.value()), rogue_endpoint);
  outcome.defense = delivery.ok() ? "" : delivery.error().code;
  outcome.defense_fired =
      !delivery.ok() && delivery.error().code == "unauthorized-endpoint";
  outcome.detail = "channel delivery restricted to the attested container";
  return outcome;
}

// Network adversary probing service endpoints with garbage. Every probe
// must come back as a clean refusal, never a crash.
ScenarioOutcome run_malformed_message(const AdversaryScript& script) {
  ScenarioOutcome outcome;
  outcome.kind = script.kind;

  Rng rng(script.seed);
  auto platform = enclave::PlatformIdentity::provision(1, rng, 2);
  enclave::PlatformRegistry registry;
  registry.enroll(platform, 2);
  enclave::SimulatedAttestationService service(std::move(registry));
  cas::CasService cas(service, rng.fork("cas"));

  int probes = 0, refused = 0;
  const auto probe = [&probes, &refused](bool clean_refusal) {
    ++probes;
    if (clean_refusal) ++refused;
  };

  try {
    probe(!cas.begin_session(std::string(300, 'x'), 0).ok());
    probe(!cas.begin_session("", 0).ok());
    probe(!cas.verify_and_inject(0xDEAD, enclave::Quote{}, 0).ok());

    // a structurally valid quote full of garbage
    enclave::Quote junk;
    junk.report.platform_id = 0xBADBAD;
    junk.report.mre = rng.fixed<32>();
    junk.ak_signature.v = 99;
    probe(!verify_quote(junk, registry).positive);

    enclave::Report foreign;
    foreign.platform_id = platform.platform_id() + 1;
    probe(!las_quote(foreign, platform).ok());

    probe(!enclave::PlatformRegistry::from_text("not a registry\nzz yy xx").ok());
    probe(!cas::Policy::from_json("{\"sid\": 12}").ok());
    const Bytes garbage = rng.bytes(64);
    probe(!cas::Policy::from_json(std::string(garbage.begin(), garbage.end())).ok());
    probe(!drop::parse_fixture_image(rng.bytes(40)).ok());
  } catch (const std::exception& e) {
    outcome.detail = std::string("endpoint crashed: ") + e.what();
    return outcome;
  }

  outcome.defense = "clean-refusal";
  outcome.defense_fired = probes == refused;
  outcome.detail = std::to_string(refused) + "/" + std::to_string(probes) +
                   " probes refused cleanly";
  return outcome;
}

// One committed (msg, sig) pair resubmitted verbatim, in both modes.
ScenarioOutcome run_replay_signature(const AdversaryScript& script) {
  ScenarioOutcome outcome;
  outcome.kind = script.kind;
  const auto comparison = replay_signature_comparison(script.seed);
  outcome.defense = "replay-guard";
  outcome.defense_fired =
      !comparison.guarded_accepted_replay && comparison.faithful_accepted_replay;
  outcome.detail = std::string("guarded=") +
                   (comparison.guarded_accepted_replay ? "accepted" : "rejected") +
                   " faithful=" +
                   (comparison.faithful_accepted_replay ? "accepted" : "rejected");
  return outcome;
}

}  // namespace

ReplayComparison replay_signature_comparison(std::uint64_t seed) {
  ReplayComparison result;

  const auto run_mode = [seed](bool faithful) {
    Rng rng(seed);
    const auto owner = crypto::keygen(rng);
    const auto owner_ea = crypto::derive_address(owner.pk).value();
    const auto offcf = crypto::keygen(rng);
    const auto offcf_ea = crypto::derive_address(offcf.pk).value();

    contracts::DAppAttestationContract dapp(owner_ea, {}, faithful);
    chain::CallContext reg(owner_ea, 1, Hash32{});
    dapp.call(reg, "RegisterPK",
              contracts::DAppAttestationContract::register_pk_args(offcf_ea))
        .value();

    const Bytes msg = rng.bytes(32);
    const auto sig = crypto::sign(msg, offcf.sk).value();
    const auto args = contracts::DAppAttestationContract::verify_args(msg, sig);

    chain::CallContext first(offcf_ea, 2, Hash32{});
    const bool original =
        dapp.call(first, "OffChainFunctionSignatureVerify", args).value() ==
        Bytes{1};
    chain::CallContext second(offcf_ea, 3, Hash32{});
    const bool replayed =
        dapp.call(second, "OffChainFunctionSignatureVerify", args).value() ==
        Bytes{1};
    return std::pair<bool, bool>(original, replayed);
  };

  const auto [guarded_first, guarded_replay] = run_mode(false);
  const auto [faithful_first, faithful_replay] = run_mode(true);
  // the original interaction must verify in both modes
  result.guarded_accepted_replay = !guarded_first || guarded_replay;
  result.faithful_accepted_replay = faithful_first && faithful_replay;
  return result;
}

ScenarioOutcome apply(const AdversaryScript& script) {
  switch (script.kind) {
    case AdversaryKind::kTamperImage: return run_tamper_image(script);
    case AdversaryKind::kReplayQuote: return run_replay_quote(script);
    case AdversaryKind::kReplaySignature: return run_replay_signature(script);
    case AdversaryKind::kRollbackState: return run_rollback_state(script);
    case AdversaryKind::kFirmwareRollback: return run_firmware_rollback(script);
    case AdversaryKind::kUnauthorizedChannel:
      return run_unauthorized_channel(script);
    case AdversaryKind::kMalformedMessage: return run_malformed_message(script);
  }
  return ScenarioOutcome{};
}

Result<std::vector<AdversaryScript>> load_scenarios(const std::string& text) {
  const auto fail = [](std::string detail) {
    return Result<std::vector<AdversaryScript>>::failure("parse-error",
                                                         std::move(detail));
  };
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    return std::vector<AdversaryScript>{};  // empty file: nothing to run
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_array()) return fail("expected a json array");
  std::vector<AdversaryScript> scripts;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("kind") || !item["kind"].is_string())
      return fail("script needs a string kind");
    const auto kind = kind_from_string(item["kind"].get<std::string>());
    if (!kind.ok()) return fail("unknown kind " + item["kind"].get<std::string>());
    AdversaryScript script;
    script.kind = kind.value();
    if (item.contains("seed")) script.seed = item["seed"].get<std::uint64_t>();
    if (item.contains("byte_offset"))
      script.byte_offset = item["byte_offset"].get<std::size_t>();
    if (item.contains("counter_delta"))
      script.counter_delta = item["counter_delta"].get<std::uint64_t>();
    scripts.push_back(script);
  }
  return scripts;
}

std::vector<AdversaryScript> default_scenario_pack() {
  std::vector<AdversaryScript> pack;
  pack.push_back({AdversaryKind::kTamperImage, 101, 7, 1});
  pack.push_back({AdversaryKind::kReplayQuote, 102, 0, 1});
  pack.push_back({AdversaryKind::kReplaySignature, 103, 0, 1});
  pack.push_back({AdversaryKind::kRollbackState, 104, 0, 1});
  pack.push_back({AdversaryKind::kFirmwareRollback, 105, 0, 2});
  pack.push_back({AdversaryKind::kUnauthorizedChannel, 106, 0, 1});
  pack.push_back({AdversaryKind::kMalformedMessage, 107, 0, 1});
  return pack;
}

std::string outcomes_to_jsonl(const std::vector<ScenarioOutcome>& outcomes) {
  std::string out;
  for (const auto& outcome : outcomes) {
    out += outcome.to_json();
    out += '\n';
  }
  return out;
}

}  // namespace teemaf::threats
