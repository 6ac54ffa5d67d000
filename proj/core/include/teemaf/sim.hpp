// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace teemaf::sim {

// Single-threaded discrete-event loop over a virtual millisecond clock.
// Ties broken by scheduling order, so runs are fully deterministic.
class Scheduler {
 public:
  using Task = std::function<void()>;

  void at(std::int64_t t_ms, Task task) {
    queue_.push(Item{t_ms < now_ ? now_ : t_ms, seq_++, std::move(task)});
  }

  std::int64_t now() const { return now_; }
  bool empty() const { return queue_.empty(); }

  bool step() {
    if (queue_.empty()) return false;
    Item item = queue_.top();
    queue_.pop();
    now_ = item.t;
    item.task();
    return true;
  }

  void run_until(std::int64_t t_ms) {
    while (!queue_.empty() && queue_.top().t <= t_ms) step();
    if (now_ < t_ms) now_ = t_ms;
  }

  void run_all() {
    while (step()) {
    }
  }

 private:
  struct Item {
    std::int64_t t;
    std::uint64_t seq;
    Task task;
    bool operator>(const Item& other) const {
      return t != other.t ? t > other.t : seq > other.seq;
    }
  };
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue_;
  std::int64_t now_ = 0;
  std::uint64_t seq_ = 0;
};

}  // namespace teemaf::sim
