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

#include "chainfab/chain_store.hpp"

#include <algorithm>

namespace chainfab {

std::string work_to_string(Work w) {
    if (w == 0) return "0";
    std::string s;
    while (w > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(w % 10)));
        w /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

ChainStore::ChainStore(GenesisConfig genesis) : genesis_(std::move(genesis)) {
    genesis_.consensus.validate();
    Block g = genesis_block(genesis_);
    genesis_id_ = g.id();
    ChainEntry entry{std::move(g), genesis_id_, 1, std::make_shared<const LedgerState>(genesis_state(genesis_))};
    entries_.emplace(genesis_id_, std::move(entry));
    tips_.insert(genesis_id_);
}

AddResult ChainStore::add_block(const Block& block) {
    auto id = block.id();
    if (entries_.contains(id)) return {AddOutcome::Duplicate, id, {}};
    auto parent_it = entries_.find(block.header.prev_hash);
    if (parent_it == entries_.end()) return {AddOutcome::UnknownParent, id, {}};
    const auto& parent = parent_it->second;

    auto ev = evaluate_block(block, parent.block.header, *parent.state, genesis_.consensus);
    if (!ev.ok()) return {AddOutcome::Invalid, id, std::move(ev.violations)};

    int bits = block.header.pow_zero_bits;
    Work work = parent.cumulative_work + (Work{1} << std::min(bits, 127));
    ChainEntry entry{block, id, work, std::make_shared<const LedgerState>(std::move(ev.post_state))};
    tips_.erase(parent.id);
    tips_.insert(id);
    children_.emplace(parent.id, id);
    entries_.emplace(id, std::move(entry));
    return {AddOutcome::Added, id, {}};
}

const ChainEntry* ChainStore::find(const Digest256& id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<Digest256> ChainStore::children(const Digest256& id) const {
    std::vector<Digest256> out;
    auto [lo, hi] = children_.equal_range(id);
    for (auto it = lo; it != hi; ++it) out.push_back(it->second);
    return out;
}

std::vector<const ChainEntry*> ChainStore::branch(const Digest256& tip) const {
    std::vector<const ChainEntry*> out;
    const ChainEntry* cur = find(tip);
    while (cur) {
        out.push_back(cur);
        if (cur->height() == 0) break;
        cur = find(cur->block.header.prev_hash);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

const ChainEntry* ChainStore::ancestor_at(const Digest256& tip, std::uint64_t height) const {
    const ChainEntry* cur = find(tip);
    while (cur && cur->height() > height) cur = find(cur->block.header.prev_hash);
    return cur && cur->height() == height ? cur : nullptr;
}

Digest256 fork_choice(const ChainStore& store) {
    const ChainEntry* best = nullptr;
    for (const auto& id : store.tips()) {
        const auto* e = store.find(id);
        // tips_ iterates in ascending id order, so strict > keeps the smallest id on ties
        if (!best || e->cumulative_work > best->cumulative_work) best = e;
    }
    return best->id;
}

}  // namespace chainfab
