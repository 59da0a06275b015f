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

#include "chainfab/mempool.hpp"

namespace chainfab {

const Transaction* Mempool::find(const Digest256& id) const {
    if (!ids_.contains(id)) return nullptr;
    for (const auto& tx : entries_) {
        if (tx.id() == id) return &tx;
    }
    return nullptr;
}

bool Mempool::push_back(Transaction tx) {
    if (full()) return false;
    auto id = tx.id();
    if (!ids_.insert(id).second) return false;
    entries_.push_back(std::move(tx));
    return true;
}

void Mempool::push_front(const std::vector<Transaction>& txs) {
    std::vector<Transaction> merged;
    merged.reserve(txs.size() + entries_.size());
    for (const auto& tx : txs) {
        if (ids_.insert(tx.id()).second) merged.push_back(tx);
    }
    for (auto& tx : entries_) merged.push_back(std::move(tx));
    while (merged.size() > capacity_) {
        ids_.erase(merged.back().id());
        merged.pop_back();
    }
    entries_ = std::move(merged);
}

std::vector<Transaction> Mempool::head(std::size_t n) const {
    n = std::min(n, entries_.size());
    return {entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(n)};
}

LedgerState Mempool::revalidate(const LedgerState& base, UnixSeconds block_time, std::vector<Digest256>* dropped) {
    LedgerState state = base;
    TxContext ctx{block_time, std::nullopt};
    std::vector<Transaction> kept;
    kept.reserve(entries_.size());
    for (auto& tx : entries_) {
        if (try_apply(state, tx, ctx)) {
            auto id = tx.id();
            ids_.erase(id);
            if (dropped) dropped->push_back(id);
        } else {
            kept.push_back(std::move(tx));
        }
    }
    entries_ = std::move(kept);
    return state;
}

}  // namespace chainfab
