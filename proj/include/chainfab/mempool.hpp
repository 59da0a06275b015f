/*
   Copyright 2026 The Chainfab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstddef>
#include <unordered_set>
#include <vector>

#include "chainfab/ledger.hpp"

namespace chainfab {

constexpr std::size_t kDefaultMempoolCapacity = 10'000;

/// Pending transactions in arrival order.
class Mempool {
  public:
    explicit Mempool(std::size_t capacity = kDefaultMempoolCapacity) : capacity_(capacity) {}

    [[nodiscard]] bool contains(const Digest256& id) const { return ids_.contains(id); }
    [[nodiscard]] bool full() const { return entries_.size() >= capacity_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    [[nodiscard]] const std::vector<Transaction>& entries() const { return entries_; }
    [[nodiscard]] const Transaction* find(const Digest256& id) const;

    // Returns false when full or already present.
    bool push_back(Transaction tx);
    // Reinserts at the front, keeping the given order. Entries already present
    // are skipped; overflow is trimmed from the back.
    void push_front(const std::vector<Transaction>& txs);

    [[nodiscard]] std::vector<Transaction> head(std::size_t n) const;

    /// Drops every entry that no longer applies on top of base (in order) and
    /// returns the state with the survivors applied.
    LedgerState revalidate(const LedgerState& base, UnixSeconds block_time, std::vector<Digest256>* dropped = nullptr);

  private:
    std::size_t capacity_;
    std::vector<Transaction> entries_;
    std::unordered_set<Digest256> ids_;
};

}  // namespace chainfab
