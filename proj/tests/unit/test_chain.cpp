// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "teemaf/chain.hpp"
#include "teemaf/keccak.hpp"
#include "teemaf/rng.hpp"

using namespace teemaf;
using namespace teemaf::chain;

namespace {

// Minimal deterministic contract for chain-level tests.
class KvContract final : public Contract {
 public:
  Result<Bytes> call(CallContext& ctx, std::string_view method,
                     const Bytes& args) override {
    if (method == "set") {
      if (args.size() != 2) return Result<Bytes>::failure("bad-args");
      kv_[args[0]] = args[1];
      ctx.emit("set", args);
      return Bytes{};
    }
    if (method == "fail") return Result<Bytes>::failure("deliberate");
    if (method == "spend") {
      ctx.charge_ms(7);
      return Bytes{};
    }
    return Result<Bytes>::failure("unknown-method");
  }

  std::map<std::string, Bytes> state_map() const override {
    std::map<std::string, Bytes> out;
    for (const auto& [k, v] : kv_) out[std::string(1, char(k))] = Bytes{v};
    return out;
  }

 private:
  std::map<std::uint8_t, std::uint8_t> kv_;
};

const crypto::EthAddress kKv = [] {
  crypto::EthAddress a;
  a.bytes[0] = 0x42;
  return a;
}();

ChainSim make_chain(ChainConfig cfg) {
  ChainSim sim(cfg);
  sim.deploy(kKv, [] { return std::make_unique<KvContract>(); });
  return sim;
}

Transaction set_tx(std::uint8_t key, std::uint8_t value) {
  Transaction tx;
  tx.sender.bytes[19] = 0x01;
  tx.contract = kKv;
  tx.method = "set";
  tx.args = Bytes{key, value};
  return tx;
}

}  // namespace

TEST_CASE("single node: tx submitted at t=0 commits in the block at t=5s") {
  auto sim = make_chain({.node_count = 1, .block_time_ms = 5000});
  const auto id = sim.submit(set_tx(1, 2), 0, 0);
  sim.seal_until(5000);
  REQUIRE(sim.commit_info(id) != nullptr);
  CHECK(sim.commit_info(id)->height == 1);
  CHECK(sim.latency_ms(id).value() == 5000);
  CHECK(sim.blocks().size() == 1);
  CHECK(sim.blocks()[0].timestamp_ms == 5000);
}

TEST_CASE("gossip: 4-node line, 3 hops at 50ms each") {
  auto sim = make_chain({.node_count = 4,
                         .block_time_ms = 5000,
                         .gossip_delay_ms = 50,
                         .topology = Topology::kLine});
  const auto id = sim.submit(set_tx(1, 1), 0, 0);
  CHECK(sim.pool_arrival_ms(0, id) == 0);
  CHECK(sim.pool_arrival_ms(1, id) == 50);
  CHECK(sim.pool_arrival_ms(3, id) == 150);
}

TEST_CASE("ring and mesh hop distances") {
  auto ring = make_chain({.node_count = 6, .topology = Topology::kRing});
  CHECK(ring.hops(0, 5) == 1);
  CHECK(ring.hops(0, 3) == 3);
  auto mesh = make_chain({.node_count = 6, .topology = Topology::kFullMesh});
  CHECK(mesh.hops(0, 5) == 1);
  CHECK(mesh.hops(2, 2) == 0);
}

TEST_CASE("capacity: 10 txs drain as blocks of 4, 4, 2") {
  auto sim =
      make_chain({.node_count = 1, .block_time_ms = 1000, .block_capacity = 4});
  for (std::uint8_t i = 0; i < 10; ++i) sim.submit(set_tx(i, i), 0, 0);
  sim.seal_until(3000);
  REQUIRE(sim.blocks().size() == 3);
  CHECK(sim.blocks()[0].txs.size() == 4);
  CHECK(sim.blocks()[1].txs.size() == 4);
  CHECK(sim.blocks()[2].txs.size() == 2);
  CHECK(sim.pools_empty());
}

TEST_CASE("liveness: empty blocks are still sealed") {
  auto sim = make_chain({.node_count = 2, .block_time_ms = 1000});
  sim.seal_until(3500);
  CHECK(sim.blocks().size() == 3);
  for (const auto& b : sim.blocks()) CHECK(b.txs.empty());
}

TEST_CASE("chain linkage: parent hash covers the predecessor") {
  auto sim = make_chain({.node_count = 3, .block_time_ms = 1000});
  for (std::uint8_t i = 0; i < 6; ++i) sim.submit(set_tx(i, i), i % 3, 10 * i);
  sim.seal_until(4000);
  const auto& blocks = sim.blocks();
  REQUIRE(blocks.size() >= 2);
  CHECK(blocks[0].parent_hash == sim.genesis_hash());
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    CHECK(blocks[i].parent_hash == blocks[i - 1].hash);
    CHECK(blocks[i].height == blocks[i - 1].height + 1);
    CHECK(blocks[i].sealer_id == int(i % 3));
  }
}

TEST_CASE("revert leaves state unchanged and logs a revert event") {
  auto sim = make_chain({.node_count = 1, .block_time_ms = 1000});
  sim.submit(set_tx(1, 9), 0, 0);
  sim.seal_until(1000);
  const auto before = sim.contract(0, kKv)->state_map();

  Transaction bad;
  bad.contract = kKv;
  bad.method = "fail";
  const auto id = sim.submit(bad, 0, 1100);
  sim.seal_until(2000);

  CHECK(sim.contract(0, kKv)->state_map() == before);
  CHECK(sim.commit_info(id)->reverted);
  CHECK(sim.commit_info(id)->revert_code == "deliberate");
  const auto& events = sim.events(0);
  REQUIRE(!events.empty());
  CHECK(events.back().name == "revert");
  CHECK(events.back().tx_id == id);
}

TEST_CASE("per-tx charges accumulate into block execution time") {
  auto sim = make_chain({.node_count = 1, .block_time_ms = 1000});
  Transaction spend;
  spend.contract = kKv;
  spend.method = "spend";
  const auto a = sim.submit(spend, 0, 0);
  const auto b = sim.submit(spend, 0, 1);
  sim.seal_until(1000);
  // both txs observe the full block's execution cost (2 x 7ms)
  CHECK(sim.latency_ms(a).value() == 1000 + 14);
  CHECK(sim.latency_ms(b).value() == 1000 + 14 - 1);
}

TEST_CASE("latency has a gossip term for remote sealers") {
  // 3 txs, hand-computed: block 1 sealer 0, block 2 sealer 1, block 3 sealer 2.
  auto sim = make_chain({.node_count = 3,
                         .block_time_ms = 1000,
                         .block_capacity = 1,
                         .gossip_delay_ms = 40,
                         .topology = Topology::kRing});
  const auto t1 = sim.submit(set_tx(1, 1), 0, 0);
  const auto t2 = sim.submit(set_tx(2, 2), 0, 100);
  const auto t3 = sim.submit(set_tx(3, 3), 0, 200);
  sim.seal_until(3000);
  // t1: sealed by node 0 at 1000, observed on node 0: 1000 - 0
  CHECK(sim.latency_ms(t1).value() == 1000);
  // t2: sealed by node 1 at 2000, one hop back to node 0, minus submit 100
  CHECK(sim.latency_ms(t2).value() == 2000 + 40 - 100);
  // t3: sealed by node 2 at 3000 (ring hop 1): 3000 + 40 - 200
  CHECK(sim.latency_ms(t3).value() == 3000 + 40 - 200);
  CHECK(!sim.latency_ms(Hash32{}).ok());
}

TEST_CASE("txs not yet gossiped to the sealer wait for a later block") {
  auto sim = make_chain({.node_count = 2,
                         .block_time_ms = 1000,
                         .gossip_delay_ms = 300,
                         .topology = Topology::kRing});
  // submitted via node 1 at t=900; reaches node 0 (sealer of block 1) at 1200
  const auto id = sim.submit(set_tx(5, 5), 1, 900);
  sim.seal_until(2000);
  REQUIRE(sim.commit_info(id) != nullptr);
  CHECK(sim.commit_info(id)->height == 2);  // block 2 sealed by node 1 at 2000
}

TEST_CASE("every submitted tx commits exactly once when the pool drains") {
  Rng rng(99);
  auto sim =
      make_chain({.node_count = 4, .block_time_ms = 500, .block_capacity = 7});
  std::set<Hash32> ids;
  for (int i = 0; i < 100; ++i) {
    const auto id = sim.submit(set_tx(rng.byte(), rng.byte()),
                               int(rng.below(4)), std::int64_t(rng.below(3000)));
    CHECK(ids.insert(id).second);  // unique ids
  }
  sim.seal_until(40'000);
  CHECK(sim.pools_empty());
  int committed = 0;
  std::size_t total_in_blocks = 0;
  for (const auto& id : ids)
    if (sim.commit_info(id)) ++committed;
  for (const auto& b : sim.blocks()) total_in_blocks += b.txs.size();
  CHECK(committed == 100);
  CHECK(total_in_blocks == 100);  // no duplication
}

TEST_CASE("safety: replicas agree and replay reproduces state") {
  Rng rng(0x5AFE);
  for (int trial = 0; trial < 20; ++trial) {
    const int nodes = 1 + int(rng.below(7));
    auto sim = make_chain({.node_count = nodes,
                           .block_time_ms = 400,
                           .block_capacity = 5,
                           .gossip_delay_ms = std::int64_t(rng.below(200))});
    const int txs = 20 + int(rng.below(30));
    for (int i = 0; i < txs; ++i) {
      Transaction tx = rng.below(8) == 0
                           ? Transaction{.contract = kKv, .method = "fail"}
                           : set_tx(rng.byte(), rng.byte());
      sim.submit(tx, int(rng.below(nodes)), std::int64_t(rng.below(5000)));
    }
    sim.seal_until(60'000);
    REQUIRE(sim.pools_empty());
    const Hash32 reference = sim.state_digest(0);
    for (int n = 1; n < nodes; ++n) CHECK(sim.state_digest(n) == reference);
    CHECK(sim.replay_state_digest() == reference);
  }
}

TEST_CASE("N-node and single-node runs of one tx stream agree on final state") {
  auto multi =
      make_chain({.node_count = 5, .block_time_ms = 1000, .gossip_delay_ms = 0});
  auto single = make_chain({.node_count = 1, .block_time_ms = 1000});
  Rng rng(123);
  for (int i = 0; i < 40; ++i) {
    const auto tx = set_tx(rng.byte(), rng.byte());
    const auto t = std::int64_t(rng.below(4000));
    multi.submit(tx, int(rng.below(5)), t);
    single.submit(tx, 0, t);
  }
  multi.seal_until(20'000);
  single.seal_until(20'000);
  CHECK(multi.contract(0, kKv)->state_map() ==
        single.contract(0, kKv)->state_map());
}

TEST_CASE("event log export is one json object per line") {
  auto sim = make_chain({.node_count = 1, .block_time_ms = 1000});
  sim.submit(set_tx(7, 8), 0, 0);
  sim.seal_until(1000);
  const std::string jsonl = sim.export_event_log_jsonl();
  CHECK(jsonl.find("\"name\":\"set\"") != std::string::npos);
  CHECK(jsonl.find("\"height\":1") != std::string::npos);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 1);
}

TEST_CASE("drop hook loses exactly one matching submission") {
  auto sim = make_chain({.node_count = 1, .block_time_ms = 1000});
  sim.inject_drop_next([](const Transaction& tx) { return tx.method == "set"; });
  const auto lost = sim.submit(set_tx(1, 1), 0, 0);
  const auto kept = sim.submit(set_tx(2, 2), 0, 10);
  sim.seal_until(1000);
  CHECK(sim.commit_info(lost) == nullptr);
  CHECK(sim.commit_info(kept) != nullptr);
}
