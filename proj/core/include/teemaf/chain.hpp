// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic simulated PoA chain: N replicas, gossip-delayed pools,
// round-robin sealing at exact block-time intervals (idealized Clique,
// no forks), and deterministic contract execution with event logs.
// Everything runs on a virtual millisecond clock; wall time never leaks in.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "teemaf/crypto.hpp"
#include "teemaf/result.hpp"

namespace teemaf::chain {

enum class Topology { kRing, kLine, kFullMesh };

struct ChainConfig {
  int node_count = 1;
  std::int64_t block_time_ms = 5'000;
  int block_capacity = 200;
  std::int64_t gossip_delay_ms = 50;
  Topology topology = Topology::kRing;
};

struct Transaction {
  crypto::EthAddress sender;
  crypto::EthAddress contract;
  std::string method;
  Bytes args;
  // set by the chain at submission
  std::int64_t submit_time_ms = 0;
  int via_node = 0;
  Hash32 id{};
};

struct Event {
  std::int64_t height = 0;
  Hash32 tx_id{};
  crypto::EthAddress contract;
  std::string name;
  Bytes data;

  bool operator==(const Event&) const = default;
};

struct Block {
  std::int64_t height = 0;
  Hash32 parent_hash{};
  int sealer_id = 0;
  std::int64_t timestamp_ms = 0;  // height * block_time in the idealized protocol
  std::vector<Transaction> txs;
  Hash32 hash{};
};

// Execution context handed to a contract method. Events are buffered and
// appended to the log only if the call succeeds; virtual execution cost
// charged here delays when the block's results become observable.
class CallContext {
 public:
  CallContext(crypto::EthAddress sender, std::int64_t height, Hash32 tx_id)
      : sender_(sender), height_(height), tx_id_(tx_id) {}

  const crypto::EthAddress& sender() const { return sender_; }
  std::int64_t height() const { return height_; }
  const Hash32& tx_id() const { return tx_id_; }

  void emit(std::string name, Bytes data) {
    events_.emplace_back(std::move(name), std::move(data));
  }
  void charge_ms(std::int64_t ms) { charged_ms_ += ms; }

  const std::vector<std::pair<std::string, Bytes>>& emitted() const {
    return events_;
  }
  std::int64_t charged_ms() const { return charged_ms_; }

 private:
  crypto::EthAddress sender_;
  std::int64_t height_;
  Hash32 tx_id_;
  std::vector<std::pair<std::string, Bytes>> events_;
  std::int64_t charged_ms_ = 0;
};

// Deterministic contract logic. Implementations must validate before
// mutating: a failed call leaves state exactly as it was.
class Contract {
 public:
  virtual ~Contract() = default;
  virtual Result<Bytes> call(CallContext& ctx, std::string_view method,
                             const Bytes& args) = 0;
  // Canonical key→value view of the full state, used for cross-node
  // comparison and replay checks.
  virtual std::map<std::string, Bytes> state_map() const = 0;
};

using ContractFactory = std::function<std::unique_ptr<Contract>()>;

struct CommitInfo {
  std::int64_t height = 0;
  std::int64_t block_timestamp_ms = 0;
  std::int64_t block_exec_ms = 0;  // total charged cost of the block
  int sealer = 0;
  int via_node = 0;
  std::int64_t submit_time_ms = 0;
  bool reverted = false;
  std::string revert_code;
};

class ChainSim {
 public:
  explicit ChainSim(ChainConfig config);

  // Pre-genesis setup: installs a contract at `address` on every replica.
  void deploy(const crypto::EthAddress& address, const ContractFactory& factory);

  // Enters via_node's pool now and every other pool after gossip.
  Hash32 submit(Transaction tx, int via_node, std::int64_t now_ms);

  // Seals one block per block-time tick up to and including t_ms.
  void seal_until(std::int64_t t_ms);

  std::int64_t next_seal_time_ms() const;
  bool pools_empty() const;
  std::size_t pending_count() const;

  // Commit timestamp + block execution cost + gossip back to the
  // submitting node, minus submit time. Fails with "not-committed".
  Result<std::int64_t> latency_ms(const Hash32& tx_id) const;

  const CommitInfo* commit_info(const Hash32& tx_id) const;
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Event>& events(int node = 0) const { return logs_[node]; }
  std::optional<std::int64_t> pool_arrival_ms(int node, const Hash32& tx_id) const;

  // Typed access to a node's contract replica (reads/views).
  Contract* contract(int node, const crypto::EthAddress& address);
  const Contract* contract(int node, const crypto::EthAddress& address) const;

  // Digest over every contract's state map plus the event log.
  Hash32 state_digest(int node) const;

  // Replays the sealed blocks onto fresh replicas; byte-identical state
  // is the determinism contract.
  Hash32 replay_state_digest() const;

  int hops(int from, int to) const;
  const ChainConfig& config() const { return config_; }
  const Hash32& genesis_hash() const { return genesis_hash_; }

  // {"height":..,"tx_id":..,"contract":..,"name":..,"data":..} per line.
  std::string export_event_log_jsonl(int node = 0) const;

  // Test hook: drop the next submitted tx matching the predicate (models
  // a lost transaction; the submitter never learns an id was discarded).
  void inject_drop_next(std::function<bool(const Transaction&)> predicate);

 private:
  struct PoolEntry {
    std::int64_t arrival_ms;
    Transaction tx;
  };
  struct Replica {
    std::map<crypto::EthAddress, std::unique_ptr<Contract>> contracts;
  };

  void execute_block(const Block& block);

  ChainConfig config_;
  Hash32 genesis_hash_{};
  std::vector<std::vector<PoolEntry>> pools_;
  std::vector<Replica> replicas_;
  std::vector<std::vector<Event>> logs_;
  std::vector<Block> blocks_;
  std::map<Hash32, CommitInfo> commits_;
  std::map<crypto::EthAddress, ContractFactory> factories_;
  std::map<crypto::EthAddress, std::uint64_t> sender_nonces_;
  std::function<bool(const Transaction&)> drop_next_;
};

}  // namespace teemaf::chain
