// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one line per criterion, every threshold pinned here.
// Exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "teemaf/bench.hpp"
#include "teemaf/cas.hpp"
#include "teemaf/chain.hpp"
#include "teemaf/contracts.hpp"
#include "teemaf/crypto.hpp"
#include "teemaf/drop.hpp"
#include "teemaf/keccak.hpp"
#include "teemaf/threats.hpp"

namespace fs = std::filesystem;
using namespace teemaf;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail = {}) {
  std::printf("%s %s%s%s\n", pass ? "PASS" : "FAIL", name.c_str(),
              detail.empty() ? "" : ": ", detail.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string data_path(const std::string& name) {
  return std::string(TEEMAF_TEST_DATA_DIR) + "/" + name;
}

std::vector<std::vector<std::string>> load_golden(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string f;
    while (ss >> f) fields.push_back(f);
    if (!fields.empty()) rows.push_back(std::move(fields));
  }
  return rows;
}

Bytes field_bytes(const std::string& field) {
  if (field == "-") return {};
  return from_hex(field).value();
}

// ---------------------------------------------------------------------
// 1. Protocol completeness: the happy path ends attested for 100 seeds.

void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  int ok = 0;
  Rng seeds(2026);
  for (int i = 0; i < 100; ++i) {
    drop::DemoConfig cfg;
    cfg.seed = seeds.u64();
    cfg.interactions = 3;
    if (drop::run_demo(cfg).success) ++ok;
  }
  const double elapsed = seconds_since(start);
  char detail[96];
  std::snprintf(detail, sizeof detail, "%d/100 attested, %.2f s", ok, elapsed);
  report("criterion-1-protocol-completeness", ok == 100 && elapsed < 10.0, detail);
}

// ---------------------------------------------------------------------
// 2. Soundness: the CAS gate releases secrets on exactly one row of the
//    8-row truth table.

void criterion_2() {
  const auto rows = cas::exhaustive_gate_truth_table();
  bool pass = rows.size() == 8;
  for (const auto& row : rows) {
    const bool expect = row.nonce_ok && row.mre_ok && row.avr_ok;
    if (row.released != expect) pass = false;
  }
  report("criterion-2-gate-truth-table", pass,
         std::to_string(rows.size()) + " rows, release only at (1,1,1)");
}

// ---------------------------------------------------------------------
// 3. Crypto oracle equivalence: byte-exact against the frozen vectors
//    from the independent reference implementation.

void criterion_3() {
  int vectors = 0, mismatches = 0;

  for (const auto& row : load_golden(data_path("keccak_vectors.txt"))) {
    ++vectors;
    if (to_hex(crypto::keccak256(field_bytes(row[0]))) != row[1]) ++mismatches;
  }
  const bool keccak_published =
      to_hex(crypto::keccak256({})) ==
          "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470" &&
      to_hex(crypto::keccak256(to_bytes("abc"))) ==
          "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45";

  int sig_vectors = 0;
  for (const auto& row : load_golden(data_path("crypto_golden.txt"))) {
    ++sig_vectors;
    const Bytes msg = field_bytes(row[0]);
    const auto sk = from_hex_fixed<32>(row[1]).value();
    const auto kp = crypto::keypair_from_sk(sk);
    const auto addr = crypto::derive_address(kp.value().pk);
    const auto sig = crypto::sign(msg, sk);
    const auto rec =
        crypto::recover(crypto::eth_signed_message_hash(msg), sig.value());
    if (addr.value().hex() != row[5] || to_hex(sig.value().r) != row[2] ||
        to_hex(sig.value().s) != row[3] ||
        std::to_string(int(sig.value().v)) != row[4] ||
        rec.value().hex() != row[5])
      ++mismatches;
  }
  char detail[96];
  std::snprintf(detail, sizeof detail, "%d keccak + %d signature vectors, %d mismatches",
                vectors, sig_vectors, mismatches);
  report("criterion-3-crypto-oracle-equivalence",
         mismatches == 0 && keccak_published && sig_vectors >= 100, detail);
}

// ---------------------------------------------------------------------
// 4. Tamper sensitivity: every byte position of the image, when flipped,
//    leads to an mre-mismatch refusal and a failed on-chain deployment.

void criterion_4() {
  const Bytes reference = drop::build_fixture_image("user-victim", 2,
                                                    to_bytes("payload"));
  int failures = 0, running = 0;
  for (std::size_t offset = 0; offset < reference.size(); ++offset) {
    drop::WorldConfig cfg;
    cfg.seed = 0x4000 + offset;
    cfg.chain = {.node_count = 1, .block_time_ms = 1000, .block_capacity = 50,
                 .gossip_delay_ms = 0};
    drop::DropWorld world(cfg);
    world.setup_sp();
    const auto worker = world.add_worker(0);
    const auto user = world.add_user("victim", 2);
    world.run_until(2000);
    world.set_image_tamper([offset](Bytes& image) {
      image[offset % image.size()] ^= 0x5A;
    });
    world.user_deploy(user, worker);
    if (!world.run_to_quiescence()) {
      ++failures;
      continue;
    }
    const auto* container = world.find_container(1);
    const auto* dep = world.sp().deployment(1);
    const bool defended =
        container && dep && container->failure_reason == "mre-mismatch" &&
        container->lifecycle == drop::Lifecycle::kFailed &&
        dep->state == contracts::DeploymentState::kFailed;
    if (!defended) ++failures;
    if (container && (container->lifecycle == drop::Lifecycle::kRunning ||
                      container->lifecycle == drop::Lifecycle::kStopped))
      ++running;
  }
  char detail[96];
  std::snprintf(detail, sizeof detail,
                "%zu byte positions, %d undefended, %d running containers",
                reference.size(), failures, running);
  report("criterion-4-tamper-sensitivity", failures == 0 && running == 0, detail);
}

// ---------------------------------------------------------------------
// 5. Threat coverage: one firing scenario per adversary class, and the
//    replay pair demonstrates guard-on rejection vs faithful acceptance.

void criterion_5() {
  std::set<std::string> fired;
  std::string not_fired;
  bool all_fired = true;
  for (const auto& script : threats::default_scenario_pack()) {
    const auto outcome = threats::apply(script);
    if (outcome.defense_fired) {
      fired.insert(std::string(to_string(script.kind)));
    } else {
      not_fired += " ";
      not_fired += to_string(script.kind);
      not_fired += "(" + outcome.detail + ")";
    }
    all_fired = all_fired && outcome.defense_fired;
  }
  const bool classes_covered =
      fired.contains("tamper-image") && fired.contains("replay-quote") &&
      fired.contains("replay-signature") && fired.contains("rollback-state") &&
      fired.contains("firmware-rollback") &&
      fired.contains("unauthorized-channel") &&
      fired.contains("malformed-message");

  const auto replay = threats::replay_signature_comparison(512);
  const bool replay_both_modes =
      !replay.guarded_accepted_replay && replay.faithful_accepted_replay;

  report("criterion-5-threat-coverage",
         all_fired && classes_covered && replay_both_modes,
         std::to_string(fired.size()) + "/7 classes defended" +
             (not_fired.empty() ? "" : "; not fired:" + not_fired) +
             "; replay guarded=" +
             (replay.guarded_accepted_replay ? "accepted" : "rejected") +
             " faithful=" +
             (replay.faithful_accepted_replay ? "accepted" : "rejected"));
}

// ---------------------------------------------------------------------
// 6. Evaluation trends over the default grid.

void criterion_6() {
  const auto start = std::chrono::steady_clock::now();
  const bench::GridSpec grid;  // defaults = the paper-derived sweep
  const auto swept = bench::sweep(grid);
  const double elapsed = seconds_since(start);
  const auto trends = bench::trend_report(swept);

  bool a = false, b = false, c_band = false, c_mono = false, d = false;
  for (const auto& check : trends.checks) {
    if (check.name == "throughput-strictly-decreasing-in-block-time")
      a = check.pass;
    if (check.name == "latency-non-decreasing-in-nodes" && check.pass) b = true;
    if (check.name == "latency-linear-in-nodes-r2" && !check.pass) b = false;
    if (check.name == "ra-overhead-in-calibration-band") c_band = check.pass;
    if (check.name == "ra-overhead-non-increasing-in-rate") c_mono = check.pass;
    if (check.name == "conservation-committed-plus-refused") d = check.pass;
  }
  char detail[64];
  std::snprintf(detail, sizeof detail, "grid %.1f s", elapsed);
  report("criterion-6a-throughput-vs-blocktime", a);
  report("criterion-6b-latency-vs-nodes-linear", b);
  report("criterion-6c-ra-overhead-band-and-monotone", c_band && c_mono);
  report("criterion-6d-conservation", d);
  report("criterion-6-grid-runtime-under-60s", elapsed < 60.0, detail);
}

// ---------------------------------------------------------------------
// 7. Determinism: repeated CLI invocations with one seed produce
//    byte-identical output files.

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_7() {
  const std::string cli = TEEMAF_CLI_PATH;
  const fs::path dir = fs::path("acceptance_tmp");
  fs::create_directories(dir);

  const auto run_pair = [&](const std::string& args, const std::string& stem,
                            bool& identical) {
    const fs::path a = dir / (stem + "_a.out");
    const fs::path b = dir / (stem + "_b.out");
    const std::string cmd_a =
        cli + " " + args + " --out " + a.string() + " > /dev/null 2>&1";
    const std::string cmd_b =
        cli + " " + args + " --out " + b.string() + " > /dev/null 2>&1";
    std::system(cmd_a.c_str());
    std::system(cmd_b.c_str());
    const std::string bytes_a = slurp(a);
    identical = !bytes_a.empty() && bytes_a == slurp(b);
  };

  bool demo_ok = false, threats_ok = false, bench_ok = false;
  run_pair("demo --seed 909 --interactions 4", "trace", demo_ok);
  run_pair("threats --seed 909", "threats", threats_ok);
  run_pair("bench --seed 909 --nodes 1 --block-time 5 --rate 50 --tx 200",
           "bench", bench_ok);
  fs::remove_all(dir);

  report("criterion-7-cli-determinism", demo_ok && threats_ok && bench_ok,
         std::string("trace=") + (demo_ok ? "identical" : "differs") +
             " threats=" + (threats_ok ? "identical" : "differs") +
             " csv=" + (bench_ok ? "identical" : "differs"));
}

// ---------------------------------------------------------------------
// 8. Distributed safety: replicas agree and the log replays, for 100
//    random schedules on 1-7 nodes.

void criterion_8() {
  Rng rng(0xD157);
  int agreed = 0, replayed = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    const int nodes = 1 + int(rng.below(7));
    chain::ChainConfig cfg;
    cfg.node_count = nodes;
    cfg.block_time_ms = 500;
    cfg.block_capacity = 20;
    cfg.gossip_delay_ms = std::int64_t(rng.below(150));
    chain::ChainSim sim(cfg);

    const auto owner = crypto::keygen(rng);
    const auto owner_ea = crypto::derive_address(owner.pk).value();
    const auto address = contracts::contract_address("sc-sp");
    sim.deploy(address, [owner_ea] {
      return std::make_unique<contracts::ServiceProviderContract>(
          owner_ea, contracts::ExecutionCosts{}, false, false);
    });

    const int txs = 20 + int(rng.below(40));
    for (int i = 0; i < txs; ++i) {
      crypto::EthAddress controller;
      controller.bytes[0] = std::uint8_t(i);
      // a mix of valid registrations, duplicates, and bad calls
      const int kind = int(rng.below(10));
      std::string worker = "w" + std::to_string(kind < 2 ? 0 : i);
      Bytes args = contracts::ServiceProviderContract::worker_register_args(
          worker, controller, Bytes{}, crypto::Signature{});
      if (kind == 9) args = rng.bytes(5);  // malformed, reverts identically
      sim.submit({.sender = owner_ea,
                  .contract = address,
                  .method = "OffChainWorkerRegister",
                  .args = std::move(args)},
                 int(rng.below(nodes)), std::int64_t(rng.below(4000)));
    }
    while (!sim.pools_empty()) sim.seal_until(sim.next_seal_time_ms());

    bool all_equal = true;
    for (int node = 1; node < nodes; ++node)
      if (sim.state_digest(node) != sim.state_digest(0)) all_equal = false;
    if (all_equal) ++agreed;
    if (sim.replay_state_digest() == sim.state_digest(0)) ++replayed;
  }
  char detail[64];
  std::snprintf(detail, sizeof detail, "%d/%d agreed, %d/%d replayed", agreed,
                trials, replayed, trials);
  report("criterion-8-distributed-safety", agreed == trials && replayed == trials,
         detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  std::printf("%s (%d failing)\n", g_failures == 0 ? "ALL CRITERIA PASS" : "FAILURES",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
