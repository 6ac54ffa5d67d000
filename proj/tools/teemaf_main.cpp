// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Exit codes are a stable contract:
//   0 success, 1 protocol/verification failure, 2 usage/config error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "teemaf/bench.hpp"
#include "teemaf/drop.hpp"
#include "teemaf/threats.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kProtocolFailure = 1;
constexpr int kUsageError = 2;

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return bool(out);
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_demo_cmd(std::uint64_t seed, int interactions, bool tamper,
                 std::size_t tamper_offset, bool faithful,
                 const std::string& out_path) {
  teemaf::drop::DemoConfig cfg;
  cfg.seed = seed;
  cfg.interactions = interactions;
  cfg.tamper = tamper;
  cfg.tamper_offset = tamper_offset;
  cfg.faithful_replay = faithful;

  const auto result = teemaf::drop::run_demo(cfg);
  std::string trace;
  for (const auto& line : result.trace) {
    trace += line;
    trace += '\n';
  }
  std::cout << trace;
  if (!out_path.empty() && !write_file(out_path, trace)) {
    std::cerr << "cannot write trace to " << out_path << "\n";
    return kUsageError;
  }
  if (!result.success) {
    std::cerr << "demo failed: " << result.failure << "\n";
    return kProtocolFailure;
  }
  return kOk;
}

int run_threats_cmd(const std::string& scenario_path, std::uint64_t seed,
                    const std::string& out_path) {
  std::vector<teemaf::threats::AdversaryScript> scripts;
  if (scenario_path.empty()) {
    scripts = teemaf::threats::default_scenario_pack();
    for (auto& script : scripts) script.seed += seed;
  } else {
    const auto text = read_file(scenario_path);
    if (!text) {
      std::cerr << "cannot read scenario file " << scenario_path << "\n";
      return kUsageError;
    }
    auto parsed = teemaf::threats::load_scenarios(*text);
    if (!parsed.ok()) {
      std::cerr << "scenario parse error: " << parsed.error().detail << "\n";
      return kUsageError;
    }
    scripts = std::move(parsed).value();
  }

  std::vector<teemaf::threats::ScenarioOutcome> outcomes;
  bool all_fired = true;
  for (const auto& script : scripts) {
    const auto outcome = teemaf::threats::apply(script);
    all_fired = all_fired && outcome.defense_fired;
    std::cout << to_string(script.kind) << ": "
              << (outcome.defense_fired ? "DEFENDED" : "NOT-DEFENDED") << " ("
              << (outcome.defense.empty() ? "no defense fired" : outcome.defense)
              << ")\n";
    outcomes.push_back(outcome);
  }
  const std::string log = teemaf::threats::outcomes_to_jsonl(outcomes);
  if (!out_path.empty() && !write_file(out_path, log)) {
    std::cerr << "cannot write results to " << out_path << "\n";
    return kUsageError;
  }
  return all_fired ? kOk : kProtocolFailure;
}

struct BenchArgs {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 1;
  std::string ra = "both";
  int nodes = 0;
  int block_time_s = 0;
  int rate = 0;
  int tx = 0;
};

int run_bench_cmd(const BenchArgs& args) {
  const bool single_cell =
      args.nodes > 0 || args.block_time_s > 0 || args.rate > 0 || args.tx > 0;

  if (single_cell) {
    teemaf::bench::ExperimentConfig cfg;
    cfg.node_count = args.nodes > 0 ? args.nodes : 1;
    cfg.block_time_s = args.block_time_s > 0 ? args.block_time_s : 5;
    cfg.send_rate_tps = args.rate > 0 ? args.rate : 50;
    cfg.tx_count = args.tx > 0 ? args.tx : 1000;
    cfg.seed = args.seed;

    std::ostringstream csv;
    csv << "nodes,block_time_s,send_rate_tps,ra,tx_count,seed,avg_latency_s,"
           "throughput_tps,overhead_ratio\n";
    const auto emit = [&](bool ra, double overhead, bool with_overhead,
                          const teemaf::bench::RunMetrics& m) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%d,%d,%d,%s,%d,%llu,%.6f,%.6f,",
                    cfg.node_count, cfg.block_time_s, cfg.send_rate_tps,
                    ra ? "on" : "off", cfg.tx_count,
                    static_cast<unsigned long long>(cfg.seed), m.avg_latency_s,
                    m.throughput_tps);
      csv << buf;
      if (with_overhead) {
        std::snprintf(buf, sizeof buf, "%.6f", overhead);
        csv << buf;
      }
      csv << '\n';
    };

    teemaf::bench::RunMetrics plain;
    if (args.ra == "off" || args.ra == "both") {
      cfg.ra_enabled = false;
      auto r = teemaf::bench::run(cfg);
      if (!r.ok()) {
        std::cerr << "config invalid: " << r.error().detail << "\n";
        return kUsageError;
      }
      plain = std::move(r).value();
      emit(false, 0, false, plain);
    }
    if (args.ra == "on" || args.ra == "both") {
      cfg.ra_enabled = true;
      auto r = teemaf::bench::run(cfg);
      if (!r.ok()) {
        std::cerr << "config invalid: " << r.error().detail << "\n";
        return kUsageError;
      }
      const bool with_overhead = args.ra == "both" && plain.avg_latency_s > 0;
      const double overhead =
          with_overhead ? r.value().avg_latency_s / plain.avg_latency_s - 1.0
                        : 0.0;
      emit(true, overhead, with_overhead, r.value());
    }
    std::cout << csv.str();
    if (!args.out_path.empty() && !write_file(args.out_path, csv.str())) {
      std::cerr << "cannot write csv to " << args.out_path << "\n";
      return kUsageError;
    }
    return kOk;
  }

  teemaf::bench::GridSpec grid;
  if (!args.config_path.empty()) {
    const auto text = read_file(args.config_path);
    if (!text) {
      std::cerr << "cannot read config " << args.config_path << "\n";
      return kUsageError;
    }
    auto parsed = teemaf::bench::GridSpec::from_json(*text);
    if (!parsed.ok()) {
      std::cerr << "config parse error: " << parsed.error().detail << "\n";
      return kUsageError;
    }
    grid = std::move(parsed).value();
    if (args.seed != 1) grid.seed = args.seed;
  } else {
    grid.seed = args.seed;
  }

  const auto swept = teemaf::bench::sweep(grid);
  const std::string out_path =
      args.out_path.empty() ? "teemaf_bench.csv" : args.out_path;
  if (!write_file(out_path, swept.csv)) {
    std::cerr << "cannot write csv to " << out_path << "\n";
    return kUsageError;
  }
  const auto report = teemaf::bench::trend_report(swept);
  std::cout << report.to_text();
  std::cout << "csv: " << out_path << " (" << swept.cells << " cells)\n";
  return report.all_pass() ? kOk : kProtocolFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mutual-attestation protocol simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // --seed works after the subcommand name too

  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "Deterministic run seed")->capture_default_str();

  auto* demo =
      app.add_subcommand("demo", "End-to-end attestation happy path (steps 0-7)");
  int interactions = 3;
  bool tamper = false;
  std::size_t tamper_offset = 0;
  bool faithful = false;
  std::string demo_out;
  demo->add_option("--interactions", interactions, "Signed interactions to run")
      ->capture_default_str();
  demo->add_flag("--tamper", tamper, "Flip one image byte before launch");
  demo->add_option("--tamper-offset", tamper_offset, "Byte offset to flip");
  demo->add_flag("--faithful-replay", faithful,
                 "Disable the on-chain replay guard");
  demo->add_option("--out", demo_out, "Write the trace to this file");

  auto* threats = app.add_subcommand(
      "threats", "Run adversary scenarios and log which defenses fire");
  std::string scenario_file;
  std::string threats_out;
  threats->add_option("scenarios", scenario_file,
                      "Scenario file (json array); default: built-in pack");
  threats->add_option("--out", threats_out, "Write results (json lines) here");

  auto* bench = app.add_subcommand(
      "bench", "Latency/throughput experiments over the virtual clock");
  BenchArgs bench_args;
  bench->add_option("--config", bench_args.config_path,
                    "Grid config json (grid mode)");
  bench->add_option("--out", bench_args.out_path, "CSV output path");
  bench->add_option("--ra", bench_args.ra, "on|off|both (single-cell mode)")
      ->check(CLI::IsMember({"on", "off", "both"}))
      ->capture_default_str();
  bench->add_option("--nodes", bench_args.nodes, "Single cell: node count");
  bench->add_option("--block-time", bench_args.block_time_s,
                    "Single cell: block time (s)");
  bench->add_option("--rate", bench_args.rate, "Single cell: send rate (tps)");
  bench->add_option("--tx", bench_args.tx, "Single cell: transaction count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (demo->parsed())
      return run_demo_cmd(seed, interactions, tamper, tamper_offset, faithful,
                          demo_out);
    if (threats->parsed())
      return run_threats_cmd(scenario_file, seed, threats_out);
    if (bench->parsed()) {
      bench_args.seed = seed;
      return run_bench_cmd(bench_args);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kProtocolFailure;
  }
  return kUsageError;
}
