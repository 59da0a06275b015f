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

#include <random>

#include <gtest/gtest.h>

#include "chainfab/chain_store.hpp"
#include "test_support.hpp"

namespace chainfab {
namespace {

using namespace chainfab::testing;

// Builds a side branch of n blocks from base, each mined by miner.
std::vector<Digest256> grow(ChainStore& store, Digest256 base, int n, const std::string& miner, UnixSeconds t0) {
    std::vector<Digest256> ids;
    for (int i = 0; i < n; ++i) {
        auto b = mine_child(store, base, {}, addr_of(miner), t0 + i);
        auto r = store.add_block(b);
        EXPECT_EQ(r.outcome, AddOutcome::Added);
        base = r.id;
        ids.push_back(base);
    }
    return ids;
}

TEST(ForkChoice, SingleChainTip) {
    ChainStore store(pow_genesis());
    EXPECT_EQ(fork_choice(store), store.genesis_id());
    auto ids = grow(store, store.genesis_id(), 4, "m", kGenesisTime + 10);
    EXPECT_EQ(fork_choice(store), ids.back());
    EXPECT_EQ(store.tips().size(), 1U);
}

TEST(ForkChoice, LongerBranchWins) {
    ChainStore store(pow_genesis());
    auto a = grow(store, store.genesis_id(), 3, "alice", kGenesisTime + 10);
    auto b = grow(store, store.genesis_id(), 2, "bob", kGenesisTime + 20);
    EXPECT_EQ(store.tips().size(), 2U);
    EXPECT_EQ(fork_choice(store), a.back());
}

TEST(ForkChoice, EqualWorkGoesToSmallerId) {
    ChainStore store(pow_genesis());
    auto a = grow(store, store.genesis_id(), 2, "alice", kGenesisTime + 10);
    auto b = grow(store, store.genesis_id(), 2, "bob", kGenesisTime + 10);
    ASSERT_EQ(store.find(a.back())->cumulative_work, store.find(b.back())->cumulative_work);
    EXPECT_EQ(fork_choice(store), std::min(a.back(), b.back()));
}

TEST(ForkChoice, LosingBranchGrowthBelowLeaderDoesNotMoveTip) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        ChainStore store(pow_genesis());
        auto leader = grow(store, store.genesis_id(), 5, "leader", kGenesisTime + 10);
        auto tip = fork_choice(store);
        // fork from a random point; loser stays strictly below leader's work
        auto fork_height = rng() % 5;
        Digest256 base = fork_height == 0 ? store.genesis_id() : leader[fork_height - 1];
        int room = static_cast<int>(5 - fork_height) - 1;
        for (int i = 0; i < room; ++i) {
            auto b = mine_child(store, base, {}, addr_of("loser-" + std::to_string(trial)), kGenesisTime + 100 + i);
            base = store.add_block(b).id;
            EXPECT_EQ(fork_choice(store), tip);
        }
    }
}

TEST(ChainStore, WorkStrictlyIncreasesAlongBranches) {
    ChainStore store(pow_genesis(3));
    auto ids = grow(store, store.genesis_id(), 6, "m", kGenesisTime + 10);
    auto branch = store.branch(ids.back());
    ASSERT_EQ(branch.size(), 7U);
    for (std::size_t i = 1; i < branch.size(); ++i) {
        EXPECT_GT(branch[i]->cumulative_work, branch[i - 1]->cumulative_work);
        EXPECT_EQ(branch[i]->cumulative_work, branch[i - 1]->cumulative_work + 8);
    }
    EXPECT_EQ(store.ancestor_at(ids.back(), 2)->id, ids[1]);
    EXPECT_EQ(work_to_string(branch.back()->cumulative_work), "49");
}

TEST(ChainStore, AddOutcomes) {
    ChainStore store(pow_genesis());
    auto b1 = mine_child(store, store.genesis_id(), {}, addr_of("m"), kGenesisTime + 1);
    EXPECT_EQ(store.add_block(b1).outcome, AddOutcome::Added);
    EXPECT_EQ(store.add_block(b1).outcome, AddOutcome::Duplicate);

    auto orphan = b1;
    orphan.header.prev_hash = hash_bytes("unknown");
    EXPECT_EQ(store.add_block(orphan).outcome, AddOutcome::UnknownParent);

    auto bad = mine_child(store, b1.id(), {}, addr_of("m"), kGenesisTime + 2);
    bad.transactions[0] = make_coinbase(2, addr_of("m"), 500);
    auto r = store.add_block(bad);
    EXPECT_EQ(r.outcome, AddOutcome::Invalid);
    EXPECT_FALSE(r.violations.empty());
}

TEST(ChainStore, MiningDeterminism) {
    ChainStore a(pow_genesis(6));
    ChainStore b(pow_genesis(6));
    auto x = mine_child(a, a.genesis_id(), {}, addr_of("m"), kGenesisTime + 1);
    auto y = mine_child(b, b.genesis_id(), {}, addr_of("m"), kGenesisTime + 1);
    EXPECT_EQ(x.header.nonce, y.header.nonce);
    EXPECT_EQ(x.id(), y.id());
}

TEST(ChainStore, ConservationAlongChain) {
    auto g = pow_genesis(4);
    ChainStore store(g);
    auto customer = key_for("customer");
    auto req = make_signed(customer, case_study_request());
    auto b1 = mine_child(store, store.genesis_id(), {req}, addr_of("m"), kGenesisTime + 5);
    ASSERT_EQ(store.add_block(b1).outcome, AddOutcome::Added);
    auto offer = make_signed(key_for("p"), ServiceOfferPayload{req.id(), 60, kGenesisTime + kDay});
    auto b2 = mine_child(store, b1.id(), {offer, make_signed(customer, OfferAcceptancePayload{req.id(), offer.id()})},
                         addr_of("m"), kGenesisTime + 10);
    ASSERT_EQ(store.add_block(b2).outcome, AddOutcome::Added);
    for (const auto* e : store.branch(fork_choice(store))) {
        EXPECT_TRUE(conservation_holds(*e->state));
        EXPECT_EQ(e->state->issued_supply, static_cast<Amount>(e->height()) * 50);
    }
}

}  // namespace
}  // namespace chainfab
