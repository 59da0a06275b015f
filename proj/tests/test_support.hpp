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

#include <string>
#include <vector>

#include "chainfab/block.hpp"
#include "chainfab/chain_store.hpp"

namespace chainfab::testing {

inline KeyPair key_for(const std::string& name) {
    auto d = hash_bytes("test-key:" + name);
    Seed s;
    s.bytes = d.bytes;
    return generate_keypair(s);
}

inline Address addr_of(const std::string& name) { return derive_address(key_for(name).public_key); }

constexpr UnixSeconds kGenesisTime = 1700000000;
constexpr UnixSeconds kDay = 86400;

inline GenesisConfig pow_genesis(int bits = 4, std::map<std::string, Amount> alloc = {{"customer", 100}}) {
    GenesisConfig g;
    g.network_id = "chainfab-test";
    g.timestamp = kGenesisTime;
    for (const auto& [name, amount] : alloc) g.allocations[addr_of(name)] = amount;
    g.consensus.mode = ConsensusMode::ProofOfWork;
    g.consensus.pow_zero_bits = bits;
    return g;
}

inline ServiceRequestPayload case_study_request(UnixSeconds due = kGenesisTime + 7 * kDay, Amount max_price = 100) {
    return ServiceRequestPayload{"ellipse pocket in the middle of a cube", "cnc-milling", due, max_price};
}

// Assemble and mine a child of tip carrying txs.
inline Block mine_child(const ChainStore& store, const Digest256& tip, const std::vector<Transaction>& txs,
                        const Address& miner, UnixSeconds now) {
    const auto* parent = store.find(tip);
    auto block = assemble_block(parent->block.header, *parent->state, txs, miner, now, store.consensus());
    auto mined = mine_pow(block, 1'000'000);
    if (!mined) throw std::runtime_error("mining budget exhausted");
    return *mined;
}

// Appends n blocks on top of the current best tip.
inline void extend_chain(ChainStore& store, int n, const Address& miner, UnixSeconds start) {
    for (int i = 0; i < n; ++i) {
        auto tip = fork_choice(store);
        auto b = mine_child(store, tip, {}, miner, start + i * 10);
        if (store.add_block(b).outcome != AddOutcome::Added) throw std::runtime_error("extend_chain failed");
    }
}

}  // namespace chainfab::testing
