// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#include "teemaf/chain.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "teemaf/keccak.hpp"

namespace teemaf::chain {

namespace {

Bytes serialize_events(const std::vector<Event>& events) {
  Bytes out;
  for (const auto& e : events) {
    append_u64be(out, static_cast<std::uint64_t>(e.height));
    append(out, e.tx_id);
    append(out, e.contract.bytes);
    append_u32be(out, static_cast<std::uint32_t>(e.name.size()));
    append(out, e.name);
    append_u32be(out, static_cast<std::uint32_t>(e.data.size()));
    append(out, e.data);
  }
  return out;
}

Hash32 digest_world(
    const std::map<crypto::EthAddress, std::unique_ptr<Contract>>& contracts,
    const std::vector<Event>& log) {
  Bytes material;
  for (const auto& [address, contract] : contracts) {
    append(material, address.bytes);
    for (const auto& [key, value] : contract->state_map()) {
      append_u32be(material, static_cast<std::uint32_t>(key.size()));
      append(material, key);
      append_u32be(material, static_cast<std::uint32_t>(value.size()));
      append(material, value);
    }
  }
  append(material, serialize_events(log));
  return crypto::keccak256(material);
}

}  // namespace

ChainSim::ChainSim(ChainConfig config) : config_(config) {
  genesis_hash_ = crypto::keccak256(to_bytes("teemaf.genesis"));
  pools_.resize(config_.node_count);
  replicas_.resize(config_.node_count);
  logs_.resize(config_.node_count);
}

void ChainSim::deploy(const crypto::EthAddress& address,
                      const ContractFactory& factory) {
  factories_[address] = factory;
  for (auto& replica : replicas_) replica.contracts[address] = factory();
}

int ChainSim::hops(int from, int to) const {
  const int n = config_.node_count;
  const int d = std::abs(from - to);
  switch (config_.topology) {
    case Topology::kRing: return std::min(d, n - d);
    case Topology::kLine: return d;
    case Topology::kFullMesh: return d == 0 ? 0 : 1;
  }
  return d;
}

Hash32 ChainSim::submit(Transaction tx, int via_node, std::int64_t now_ms) {
  tx.via_node = via_node;
  tx.submit_time_ms = now_ms;

  const std::uint64_t nonce = sender_nonces_[tx.sender]++;
  Bytes material;
  append(material, tx.sender.bytes);
  append(material, tx.contract.bytes);
  append_u32be(material, static_cast<std::uint32_t>(tx.method.size()));
  append(material, tx.method);
  append_u32be(material, static_cast<std::uint32_t>(tx.args.size()));
  append(material, tx.args);
  append_u64be(material, static_cast<std::uint64_t>(tx.submit_time_ms));
  append_u64be(material, nonce);
  tx.id = crypto::keccak256(material);

  if (drop_next_ && drop_next_(tx)) {
    drop_next_ = nullptr;  // lost in transit; every pool misses it
    return tx.id;
  }

  for (int node = 0; node < config_.node_count; ++node) {
    const std::int64_t arrival =
        now_ms + config_.gossip_delay_ms * hops(via_node, node);
    pools_[node].push_back(PoolEntry{arrival, tx});
  }
  return tx.id;
}

std::int64_t ChainSim::next_seal_time_ms() const {
  return (static_cast<std::int64_t>(blocks_.size()) + 1) * config_.block_time_ms;
}

bool ChainSim::pools_empty() const {
  for (const auto& pool : pools_)
    if (!pool.empty()) return false;
  return true;
}

std::size_t ChainSim::pending_count() const {
  return pools_.empty() ? 0 : pools_[0].size();
}

void ChainSim::seal_until(std::int64_t t_ms) {
  while (next_seal_time_ms() <= t_ms) {
    const std::int64_t height = static_cast<std::int64_t>(blocks_.size()) + 1;
    const std::int64_t ts = height * config_.block_time_ms;
    const int sealer = static_cast<int>((height - 1) % config_.node_count);

    // FIFO by submit time, ties broken by tx id; only what has gossiped
    // to the sealer by the tick is eligible.
    auto& pool = pools_[sealer];
    std::vector<const PoolEntry*> eligible;
    for (const auto& entry : pool)
      if (entry.arrival_ms <= ts && !commits_.contains(entry.tx.id))
        eligible.push_back(&entry);
    std::sort(eligible.begin(), eligible.end(),
              [](const PoolEntry* a, const PoolEntry* b) {
                if (a->tx.submit_time_ms != b->tx.submit_time_ms)
                  return a->tx.submit_time_ms < b->tx.submit_time_ms;
                return a->tx.id < b->tx.id;
              });
    if (eligible.size() > static_cast<std::size_t>(config_.block_capacity))
      eligible.resize(config_.block_capacity);

    Block block;
    block.height = height;
    block.parent_hash = blocks_.empty() ? genesis_hash_ : blocks_.back().hash;
    block.sealer_id = sealer;
    block.timestamp_ms = ts;
    for (const auto* entry : eligible) block.txs.push_back(entry->tx);

    Bytes material;
    append(material, block.parent_hash);
    append_u64be(material, static_cast<std::uint64_t>(height));
    append_u64be(material, static_cast<std::uint64_t>(ts));
    append_u32be(material, static_cast<std::uint32_t>(sealer));
    for (const auto& tx : block.txs) append(material, tx.id);
    block.hash = crypto::keccak256(material);

    execute_block(block);
    blocks_.push_back(std::move(block));

    // committed txs leave every pool
    if (!blocks_.back().txs.empty()) {
      for (auto& p : pools_) {
        std::erase_if(p, [&](const PoolEntry& e) {
          return commits_.contains(e.tx.id);
        });
      }
    }
  }
}

void ChainSim::execute_block(const Block& block) {
  std::int64_t block_exec_ms = 0;

  for (int node = 0; node < config_.node_count; ++node) {
    for (const auto& tx : block.txs) {
      CallContext ctx(tx.sender, block.height, tx.id);
      Result<Bytes> outcome = Result<Bytes>::failure("unknown-contract");
      auto& contracts = replicas_[node].contracts;
      const auto it = contracts.find(tx.contract);
      if (it != contracts.end()) outcome = it->second->call(ctx, tx.method, tx.args);

      if (outcome.ok()) {
        for (auto& [name, data] : ctx.emitted())
          logs_[node].push_back(
              Event{block.height, tx.id, tx.contract, name, data});
      } else {
        logs_[node].push_back(Event{block.height, tx.id, tx.contract, "revert",
                                    to_bytes(outcome.error().code)});
      }

      if (node == 0) {
        block_exec_ms += ctx.charged_ms();
        CommitInfo info;
        info.height = block.height;
        info.block_timestamp_ms = block.timestamp_ms;
        info.sealer = block.sealer_id;
        info.via_node = tx.via_node;
        info.submit_time_ms = tx.submit_time_ms;
        info.reverted = !outcome.ok();
        if (!outcome.ok()) info.revert_code = outcome.error().code;
        commits_[tx.id] = info;
      }
    }
  }

  // Results become observable once the block has fully executed.
  for (const auto& tx : block.txs) commits_[tx.id].block_exec_ms = block_exec_ms;
}

Result<std::int64_t> ChainSim::latency_ms(const Hash32& tx_id) const {
  const auto it = commits_.find(tx_id);
  if (it == commits_.end())
    return Result<std::int64_t>::failure("not-committed");
  const CommitInfo& c = it->second;
  return c.block_timestamp_ms + c.block_exec_ms +
         config_.gossip_delay_ms * hops(c.sealer, c.via_node) -
         c.submit_time_ms;
}

const CommitInfo* ChainSim::commit_info(const Hash32& tx_id) const {
  const auto it = commits_.find(tx_id);
  return it == commits_.end() ? nullptr : &it->second;
}

std::optional<std::int64_t> ChainSim::pool_arrival_ms(int node,
                                                      const Hash32& tx_id) const {
  for (const auto& entry : pools_[node])
    if (entry.tx.id == tx_id) return entry.arrival_ms;
  return std::nullopt;
}

Contract* ChainSim::contract(int node, const crypto::EthAddress& address) {
  auto& contracts = replicas_[node].contracts;
  const auto it = contracts.find(address);
  return it == contracts.end() ? nullptr : it->second.get();
}

const Contract* ChainSim::contract(int node,
                                   const crypto::EthAddress& address) const {
  const auto& contracts = replicas_[node].contracts;
  const auto it = contracts.find(address);
  return it == contracts.end() ? nullptr : it->second.get();
}

Hash32 ChainSim::state_digest(int node) const {
  return digest_world(replicas_[node].contracts, logs_[node]);
}

Hash32 ChainSim::replay_state_digest() const {
  Replica fresh;
  for (const auto& [address, factory] : factories_)
    fresh.contracts[address] = factory();
  std::vector<Event> log;

  for (const auto& block : blocks_) {
    for (const auto& tx : block.txs) {
      CallContext ctx(tx.sender, block.height, tx.id);
      Result<Bytes> outcome = Result<Bytes>::failure("unknown-contract");
      const auto it = fresh.contracts.find(tx.contract);
      if (it != fresh.contracts.end())
        outcome = it->second->call(ctx, tx.method, tx.args);
      if (outcome.ok()) {
        for (auto& [name, data] : ctx.emitted())
          log.push_back(Event{block.height, tx.id, tx.contract, name, data});
      } else {
        log.push_back(Event{block.height, tx.id, tx.contract, "revert",
                            to_bytes(outcome.error().code)});
      }
    }
  }

  return digest_world(fresh.contracts, log);
}

std::string ChainSim::export_event_log_jsonl(int node) const {
  std::ostringstream out;
  for (const auto& e : logs_[node]) {
    nlohmann::json j{{"height", e.height},
                     {"tx_id", to_hex(e.tx_id)},
                     {"contract", e.contract.hex()},
                     {"name", e.name},
                     {"data", to_hex(e.data)}};
    out << j.dump() << '\n';
  }
  return out.str();
}

void ChainSim::inject_drop_next(std::function<bool(const Transaction&)> predicate) {
  drop_next_ = std::move(predicate);
}

}  // namespace teemaf::chain
