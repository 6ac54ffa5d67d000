// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "teemaf/contracts.hpp"

using namespace teemaf;
using namespace teemaf::contracts;

namespace {

struct Caller {
  crypto::KeyPair kp;
  crypto::EthAddress addr;

  explicit Caller(std::uint64_t seed) : kp(crypto::keygen(seed)) {
    addr = crypto::derive_address(kp.pk).value();
  }

  crypto::Signature sign(ByteSpan msg) const {
    return crypto::sign(msg, kp.sk).value();
  }
};

// Direct-dispatch helper; chain integration is covered in test_drop.
Result<Bytes> invoke(chain::Contract& c, const crypto::EthAddress& sender,
                     std::string_view method, Bytes args) {
  chain::CallContext ctx(sender, 1, Hash32{});
  return c.call(ctx, method, args);
}

}  // namespace

TEST_CASE("RegisterPK: owner-only, overwrite allowed") {
  const Caller owner(1), offcf(2), stranger(3);
  DAppAttestationContract dapp(owner.addr, {}, false);

  CHECK(invoke(dapp, owner.addr, "RegisterPK",
               DAppAttestationContract::register_pk_args(offcf.addr))
            .ok());
  CHECK(dapp.registered_ea() == offcf.addr);

  const auto denied = invoke(dapp, stranger.addr, "RegisterPK",
                             DAppAttestationContract::register_pk_args(stranger.addr));
  CHECK(!denied.ok());
  CHECK(denied.error().code == "not-owner");
  CHECK(dapp.registered_ea() == offcf.addr);

  const Caller rotated(4);
  CHECK(invoke(dapp, owner.addr, "RegisterPK",
               DAppAttestationContract::register_pk_args(rotated.addr))
            .ok());
  CHECK(dapp.registered_ea() == rotated.addr);
}

TEST_CASE("signature verify: accepts the registered key, rejects others") {
  const Caller owner(1), offcf(2), wrong(3);
  DAppAttestationContract dapp(owner.addr, {}, false);

  const Bytes msg = to_bytes("msg-random-001");
  const auto args = DAppAttestationContract::verify_args(msg, offcf.sign(msg));

  // before registration: revert
  const auto early = invoke(dapp, offcf.addr, "OffChainFunctionSignatureVerify", args);
  CHECK(!early.ok());
  CHECK(early.error().code == "no-registered-key");

  REQUIRE(invoke(dapp, owner.addr, "RegisterPK",
                 DAppAttestationContract::register_pk_args(offcf.addr))
              .ok());

  CHECK(invoke(dapp, offcf.addr, "OffChainFunctionSignatureVerify", args)
            .value() == Bytes{1});

  const Bytes msg2 = to_bytes("msg-random-002");
  CHECK(invoke(dapp, offcf.addr, "OffChainFunctionSignatureVerify",
               DAppAttestationContract::verify_args(msg2, wrong.sign(msg2)))
            .value() == Bytes{0});
}

TEST_CASE("replay guard: second submission of an accepted pair is rejected") {
  const Caller owner(1), offcf(2);
  const Bytes msg = to_bytes("only-once");
  const auto args = DAppAttestationContract::verify_args(msg, offcf.sign(msg));

  DAppAttestationContract guarded(owner.addr, {}, false);
  REQUIRE(invoke(guarded, owner.addr, "RegisterPK",
                 DAppAttestationContract::register_pk_args(offcf.addr))
              .ok());
  CHECK(invoke(guarded, offcf.addr, "OffChainFunctionSignatureVerify", args)
            .value() == Bytes{1});
  CHECK(invoke(guarded, offcf.addr, "OffChainFunctionSignatureVerify", args)
            .value() == Bytes{0});
  CHECK(guarded.seen_nonce_count() == 1);

  // faithful mode reproduces the paper's guard-free behaviour
  DAppAttestationContract faithful(owner.addr, {}, true);
  REQUIRE(invoke(faithful, owner.addr, "RegisterPK",
                 DAppAttestationContract::register_pk_args(offcf.addr))
              .ok());
  CHECK(invoke(faithful, offcf.addr, "OffChainFunctionSignatureVerify", args)
            .value() == Bytes{1});
  CHECK(invoke(faithful, offcf.addr, "OffChainFunctionSignatureVerify", args)
            .value() == Bytes{1});
  CHECK(faithful.seen_nonce_count() == 0);
}

TEST_CASE("verification soundness: random wrong keys never verify") {
  const Caller owner(1), offcf(2);
  DAppAttestationContract dapp(owner.addr, {}, true);
  REQUIRE(invoke(dapp, owner.addr, "RegisterPK",
                 DAppAttestationContract::register_pk_args(offcf.addr))
              .ok());
  Rng rng(77);
  for (int i = 0; i < 300; ++i) {
    const auto intruder = crypto::keygen(rng);
    const Bytes msg = rng.bytes(16);
    const auto sig = crypto::sign(msg, intruder.sk).value();
    CHECK(invoke(dapp, owner.addr, "OffChainFunctionSignatureVerify",
                 DAppAttestationContract::verify_args(msg, sig))
              .value() == Bytes{0});
  }
}

TEST_CASE("OnChainAttestation: role-keyed verification") {
  const Caller owner(1), agent(2), other(3);
  ServiceProviderContract sp(owner.addr, {}, true, false);

  const Bytes msg = to_bytes("gate-check");
  // no key registered for the role yet
  const auto none = invoke(sp, agent.addr, "OnChainAttestation",
                           ServiceProviderContract::attestation_args(
                               sp_agent_role(), msg, agent.sign(msg)));
  CHECK(!none.ok());
  CHECK(none.error().code == "unknown-role");

  REQUIRE(invoke(sp, owner.addr, "RegisterRoleKey",
                 ServiceProviderContract::register_role_key_args(sp_agent_role(),
                                                                 agent.addr))
              .ok());
  CHECK(invoke(sp, agent.addr, "OnChainAttestation",
               ServiceProviderContract::attestation_args(sp_agent_role(), msg,
                                                          agent.sign(msg)))
            .value() == Bytes{1});
  // wrong role's key
  const Bytes msg2 = to_bytes("gate-check-2");
  CHECK(invoke(sp, other.addr, "OnChainAttestation",
               ServiceProviderContract::attestation_args(sp_agent_role(), msg2,
                                                          other.sign(msg2)))
            .value() == Bytes{0});
}

TEST_CASE("RegisterRoleKey is owner-only") {
  const Caller owner(1), mallory(9);
  ServiceProviderContract sp(owner.addr, {}, true, false);
  const auto r = invoke(sp, mallory.addr, "RegisterRoleKey",
                        ServiceProviderContract::register_role_key_args(
                            sp_agent_role(), mallory.addr));
  CHECK(!r.ok());
  CHECK(r.error().code == "not-owner");
}

namespace {

struct SpFixture {
  Caller owner{1}, sp_agent{2}, user{3}, worker_agent{4};
  ServiceProviderContract sp{owner.addr, {}, true, false};
  Rng msg_rng{0xF00D};

  SpFixture() {
    invoke(sp, owner.addr, "RegisterRoleKey",
           ServiceProviderContract::register_role_key_args(sp_agent_role(),
                                                           sp_agent.addr))
        .value();
    invoke(sp, owner.addr, "RegisterRoleKey",
           ServiceProviderContract::register_role_key_args(user_role(user.addr),
                                                           user.addr))
        .value();
  }

  Result<Bytes> register_worker(std::string_view id, const Caller& controller) {
    const Bytes msg = msg_rng.bytes(32);
    return invoke(sp, sp_agent.addr, "OffChainWorkerRegister",
                  ServiceProviderContract::worker_register_args(
                      id, controller.addr, msg, sp_agent.sign(msg)));
  }

  Result<Bytes> deploy(const Hash32& cid, std::string_view worker_id) {
    const Bytes msg = msg_rng.bytes(32);
    return invoke(sp, user.addr, "OffChainFunctionDeploy",
                  ServiceProviderContract::deploy_args(cid, worker_id, msg,
                                                       user.sign(msg)));
  }

  Result<Bytes> report(std::uint64_t id, DeploymentState st, const Caller& agent) {
    const Bytes msg = msg_rng.bytes(32);
    return invoke(sp, agent.addr, "ReportStatus",
                  ServiceProviderContract::report_status_args(id, st, msg,
                                                              agent.sign(msg)));
  }
};

}  // namespace

TEST_CASE("worker registration: gate, duplicates, lookup") {
  SpFixture f;
  CHECK(f.register_worker("w1", f.worker_agent).ok());
  REQUIRE(f.sp.worker("w1") != nullptr);
  CHECK(f.sp.worker("w1")->attested);
  CHECK(f.sp.worker("w1")->status == WorkerStatus::kAvailable);

  const auto dup = f.register_worker("w1", f.worker_agent);
  CHECK(!dup.ok());
  CHECK(dup.error().code == "duplicate-worker");

  // forged registration: signed by the wrong key
  const Bytes msg = to_bytes("forged");
  const auto before = f.sp.state_map();
  const auto forged = invoke(f.sp, f.user.addr, "OffChainWorkerRegister",
                             ServiceProviderContract::worker_register_args(
                                 "w2", f.user.addr, msg, f.user.sign(msg)));
  CHECK(!forged.ok());
  CHECK(forged.error().code == "attestation-failed");
  CHECK(f.sp.state_map() == before);  // revert left no trace
}

TEST_CASE("lookup returns only available workers") {
  SpFixture f;
  CHECK(f.sp.available_workers().empty());
  REQUIRE(f.register_worker("w1", f.worker_agent).ok());
  REQUIRE(f.register_worker("w2", Caller(5)).ok());
  CHECK(f.sp.available_workers().size() == 2);

  REQUIRE(f.deploy(Hash32{}, "w1").ok());
  const auto avail = f.sp.available_workers();
  REQUIRE(avail.size() == 1);
  CHECK(avail[0].worker_id == "w2");
}

TEST_CASE("deploy: events, busy workers, unknown workers, unregistered users") {
  SpFixture f;
  REQUIRE(f.register_worker("w1", f.worker_agent).ok());

  Hash32 cid{};
  cid[0] = 0xAA;
  chain::CallContext ctx(f.user.addr, 9, Hash32{});
  const Bytes msg = f.msg_rng.bytes(32);
  const auto r = f.sp.call(ctx, "OffChainFunctionDeploy",
                           ServiceProviderContract::deploy_args(
                               cid, "w1", msg, f.user.sign(msg)));
  REQUIRE(r.ok());
  REQUIRE(ctx.emitted().size() == 1);
  CHECK(ctx.emitted()[0].first == "orchestrate");
  CHECK(f.sp.worker("w1")->status == WorkerStatus::kBusy);

  const auto busy = f.deploy(cid, "w1");
  CHECK(!busy.ok());
  CHECK(busy.error().code == "worker-unavailable");

  const auto unknown = f.deploy(cid, "nope");
  CHECK(!unknown.ok());
  CHECK(unknown.error().code == "unknown-worker");

  // requester with no registered role key cannot deploy
  const Caller stranger(11);
  const Bytes m2 = to_bytes("m2");
  const auto ungated = invoke(f.sp, stranger.addr, "OffChainFunctionDeploy",
                              ServiceProviderContract::deploy_args(
                                  cid, "w1", m2, stranger.sign(m2)));
  CHECK(!ungated.ok());
  CHECK(ungated.error().code == "unknown-role");
}

TEST_CASE("status transitions and worker accounting") {
  SpFixture f;
  REQUIRE(f.register_worker("w1", f.worker_agent).ok());
  REQUIRE(f.deploy(Hash32{}, "w1").ok());
  CHECK(f.sp.busy_worker_count() == 1);
  CHECK(f.sp.active_deployment_count() == 1);

  // skipping running is illegal
  const auto skip = f.report(1, DeploymentState::kCompleted, f.worker_agent);
  CHECK(!skip.ok());
  CHECK(skip.error().code == "illegal-transition");

  // a different worker's key cannot report
  const auto forged = f.report(1, DeploymentState::kRunning, Caller(12));
  CHECK(!forged.ok());
  CHECK(forged.error().code == "attestation-failed");

  CHECK(f.report(1, DeploymentState::kRunning, f.worker_agent).ok());
  CHECK(f.sp.deployment(1)->state == DeploymentState::kRunning);
  CHECK(f.sp.busy_worker_count() == 1);

  CHECK(f.report(1, DeploymentState::kCompleted, f.worker_agent).ok());
  CHECK(f.sp.deployment(1)->state == DeploymentState::kCompleted);
  CHECK(f.sp.worker("w1")->status == WorkerStatus::kAvailable);
  CHECK(f.sp.busy_worker_count() == 0);
  CHECK(f.sp.active_deployment_count() == 0);

  // completed is terminal
  const auto after = f.report(1, DeploymentState::kFailed, f.worker_agent);
  CHECK(!after.ok());
  CHECK(after.error().code == "illegal-transition");
}

TEST_CASE("worker accounting invariant holds over a random call sequence") {
  SpFixture f;
  Rng rng(0xACC);
  std::vector<Caller> agents;
  for (int i = 0; i < 5; ++i) {
    agents.emplace_back(100 + i);
    REQUIRE(f.register_worker("w" + std::to_string(i), agents.back()).ok());
  }
  std::map<std::string, std::uint64_t> active_by_worker;
  std::uint64_t next_id = 1;
  for (int step = 0; step < 200; ++step) {
    const auto w = "w" + std::to_string(rng.below(5));
    if (rng.below(2) == 0) {
      if (f.deploy(Hash32{}, w).ok()) active_by_worker[w] = next_id++;
    } else if (active_by_worker.contains(w)) {
      const auto id = active_by_worker[w];
      const auto state = f.sp.deployment(id)->state;
      const auto next = state == DeploymentState::kPending
                            ? (rng.below(2) ? DeploymentState::kRunning
                                            : DeploymentState::kFailed)
                            : (rng.below(2) ? DeploymentState::kCompleted
                                            : DeploymentState::kFailed);
      REQUIRE(f.report(id, next, agents[w[1] - '0']).ok());
      if (next != DeploymentState::kRunning) active_by_worker.erase(w);
    }
    CHECK(f.sp.busy_worker_count() == f.sp.active_deployment_count());
  }
}

TEST_CASE("ra disabled: gate admits unsigned calls at zero cost") {
  const Caller owner(1), anyone(2);
  ServiceProviderContract sp(owner.addr, {}, false, false);
  chain::CallContext ctx(anyone.addr, 1, Hash32{});
  const auto r = sp.call(ctx, "OffChainWorkerRegister",
                         ServiceProviderContract::worker_register_args(
                             "w1", anyone.addr, Bytes{}, crypto::Signature{}));
  CHECK(r.ok());
  CHECK(ctx.charged_ms() == 0);
  CHECK(sp.worker("w1") != nullptr);
}

TEST_CASE("ra enabled: verification cost is charged per recover") {
  const Caller owner(1), agent(2);
  ExecutionCosts costs{.method_cost_ms = 1, .signature_verify_cost_ms = 4};
  ServiceProviderContract sp(owner.addr, costs, true, false);
  REQUIRE(invoke(sp, owner.addr, "RegisterRoleKey",
                 ServiceProviderContract::register_role_key_args(sp_agent_role(),
                                                                 agent.addr))
              .ok());
  chain::CallContext ctx(agent.addr, 1, Hash32{});
  const Bytes msg = to_bytes("cost-check");
  sp.call(ctx, "OffChainWorkerRegister",
          ServiceProviderContract::worker_register_args("w1", agent.addr, msg,
                                                        agent.sign(msg)))
      .value();
  CHECK(ctx.charged_ms() == 1 + 4);
}

TEST_CASE("malformed argument bytes revert cleanly") {
  const Caller owner(1);
  ServiceProviderContract sp(owner.addr, {}, true, false);
  DAppAttestationContract dapp(owner.addr, {}, false);
  for (const auto method :
       {"RegisterRoleKey", "OnChainAttestation", "OffChainWorkerRegister",
        "OffChainFunctionDeploy", "ReportStatus"}) {
    const auto r = invoke(sp, owner.addr, method, Bytes{0x01, 0x02});
    CHECK(!r.ok());
    CHECK(r.error().code == "bad-args");
  }
  CHECK(invoke(dapp, owner.addr, "RegisterPK", Bytes{0xFF}).error().code ==
        "bad-args");
  CHECK(invoke(dapp, owner.addr, "Bogus", Bytes{}).error().code ==
        "unknown-method");
}
