// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner over the virtual clock: worker registrations under
// nodes x block-time x send-rate, with and without the attestation
// mechanism. Absolute numbers are simulation artifacts; the trend
// predicates in trend_report are the reproducible claims.

#pragma once

#include <string>
#include <vector>

#include "teemaf/chain.hpp"

namespace teemaf::bench {

struct ExperimentConfig {
  int node_count = 1;
  int block_time_s = 5;
  int send_rate_tps = 50;
  bool ra_enabled = true;
  int tx_count = 1000;
  std::uint64_t seed = 1;

  // cost knobs (virtual milliseconds)
  std::int64_t ra_verify_cost_ms = 4;
  std::int64_t attestation_rtt_ms = 30;
  int block_capacity = 200;
  std::int64_t gossip_delay_ms = 50;
  chain::Topology topology = chain::Topology::kRing;

  Result<void> validate() const;
};

struct RunMetrics {
  double avg_latency_s = 0.0;
  double throughput_tps = 0.0;
  int committed_count = 0;
  int refused_count = 0;
  std::vector<double> latencies_s;
};

// Deterministic in (config, seed). RA runs prepend one real attestation
// flow and carry the per-signature verification cost on every tx.
Result<RunMetrics> run(const ExperimentConfig& config);

struct GridSpec {
  std::vector<int> block_times_s = {5, 9, 12, 15};
  std::vector<int> send_rates_tps = {50, 150, 250};
  std::vector<int> node_counts = {1, 2, 3, 4, 5};
  int base_node_count = 1;   // for the block-time sweep
  int base_block_time_s = 5; // for the node sweep
  int tx_count = 1000;
  std::uint64_t seed = 1;
  std::int64_t ra_verify_cost_ms = 4;
  std::int64_t attestation_rtt_ms = 30;

  static Result<GridSpec> from_json(const std::string& text);
};

struct SweepResult {
  // columns: nodes,block_time_s,send_rate_tps,ra,tx_count,seed,
  //          avg_latency_s,throughput_tps,overhead_ratio
  std::string csv;
  bool conservation_ok = true;  // committed + refused == tx_count per cell
  int cells = 0;
};

SweepResult sweep(const GridSpec& grid);

struct TrendReport {
  struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
  };
  std::vector<Check> checks;

  bool all_pass() const;
  std::string to_text() const;  // one PASS/FAIL line per predicate
};

TrendReport trend_report(const SweepResult& result);

}  // namespace teemaf::bench
