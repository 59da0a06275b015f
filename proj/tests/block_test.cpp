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

#include "chainfab/block.hpp"
#include "chainfab/chain_store.hpp"
#include "test_support.hpp"

namespace chainfab {
namespace {

using namespace chainfab::testing;

bool has_code(const std::vector<BlockViolation>& v, BlockError code) {
    return std::any_of(v.begin(), v.end(), [&](const auto& x) { return x.code == code; });
}

class BlockTest : public ::testing::Test {
  protected:
    GenesisConfig genesis = pow_genesis(8);
    ChainStore store{genesis};
    Address miner = addr_of("miner");
    const ChainEntry& tip() { return *store.find(fork_choice(store)); }
};

TEST_F(BlockTest, EmptyBlockHoldsOnlyCoinbase) {
    auto b = assemble_block(tip().block.header, *tip().state, {}, miner, kGenesisTime + 10, genesis.consensus);
    ASSERT_EQ(b.transactions.size(), 1U);
    EXPECT_EQ(b.transactions[0].kind(), TxKind::Coinbase);
    EXPECT_EQ(std::get<CoinbasePayload>(b.transactions[0].payload).amount, 50);
    EXPECT_EQ(b.header.merkle_root, b.transactions[0].id());
    EXPECT_EQ(b.header.nonce, 0U);
    EXPECT_EQ(b.header.height, 1U);
    EXPECT_EQ(b.header.prev_hash, store.genesis_id());
}

TEST_F(BlockTest, CaseStudyEncapsulation) {
    auto req = make_signed(key_for("customer"), case_study_request());
    auto o1 = make_signed(key_for("provider-a"), ServiceOfferPayload{req.id(), 80, kGenesisTime + kDay});
    auto o2 = make_signed(key_for("provider-b"), ServiceOfferPayload{req.id(), 60, kGenesisTime + kDay});
    auto b = assemble_block(tip().block.header, *tip().state, {req, o1, o2}, miner, kGenesisTime + 10, genesis.consensus);
    ASSERT_EQ(b.transactions.size(), 4U);
    std::vector<Digest256> ids{b.transactions[0].id(), req.id(), o1.id(), o2.id()};
    EXPECT_EQ(b.header.merkle_root, merkle_root(ids));
}

TEST_F(BlockTest, AssembleRejectsInvalidTransaction) {
    auto o = make_signed(key_for("provider-a"), ServiceOfferPayload{hash_bytes("missing"), 60, kGenesisTime + kDay});
    try {
        assemble_block(tip().block.header, *tip().state, {o}, miner, kGenesisTime + 10, genesis.consensus);
        FAIL() << "expected InvalidTransactionError";
    } catch (const InvalidTransactionError& e) {
        EXPECT_EQ(e.index, 1U);
        EXPECT_EQ(e.rejection.code, TxError::UnknownRequest);
    }
}

TEST_F(BlockTest, TimestampClampsForward) {
    auto b = assemble_block(tip().block.header, *tip().state, {}, miner, kGenesisTime - 500, genesis.consensus);
    EXPECT_EQ(b.header.timestamp, kGenesisTime + 1);
}

TEST_F(BlockTest, MiningBounds) {
    auto b = assemble_block(tip().block.header, *tip().state, {}, miner, kGenesisTime + 10, genesis.consensus);
    auto zero = b;
    zero.header.pow_zero_bits = 0;
    auto mined = mine_pow(zero, 1);
    ASSERT_TRUE(mined);
    EXPECT_EQ(mined->header.nonce, 0U);

    auto impossible = b;
    impossible.header.pow_zero_bits = 256;
    EXPECT_FALSE(mine_pow(impossible, 1000));
}

TEST_F(BlockTest, MiningFindsFirstSatisfyingNonce) {
    auto b = assemble_block(tip().block.header, *tip().state, {}, miner, kGenesisTime + 10, genesis.consensus);
    // Oracle: plain scan over full header hashes.
    std::uint64_t expected = 0;
    for (;; ++expected) {
        auto h = b.header;
        h.nonce = expected;
        if (leading_zero_bits(h.id()) >= 8) break;
    }
    auto mined = mine_pow(b, 1'000'000);
    ASSERT_TRUE(mined);
    EXPECT_EQ(mined->header.nonce, expected);
    EXPECT_EQ(mined->header.nonce, 15U);  // regression pin
    EXPECT_GE(leading_zero_bits(mined->id()), 8);
    EXPECT_EQ(mine_pow(b, 1'000'000)->header.nonce, expected);
}

TEST_F(BlockTest, HonestBlockValidates) {
    auto b = mine_child(store, store.genesis_id(), {}, miner, kGenesisTime + 10);
    EXPECT_TRUE(validate_block(b, tip().block.header, *tip().state, genesis.consensus).empty());
    EXPECT_TRUE(validate_genesis(genesis_block(genesis), genesis).empty());
    auto other = genesis;
    other.network_id = "other";
    EXPECT_FALSE(validate_genesis(genesis_block(genesis), other).empty());
}

TEST_F(BlockTest, InflatedCoinbaseIsBadCoinbase) {
    auto b = assemble_block(tip().block.header, *tip().state, {}, miner, kGenesisTime + 10, genesis.consensus);
    b.transactions[0] = make_coinbase(1, miner, 51);
    b.header.merkle_root = merkle_root(b.tx_ids());
    auto mined = mine_pow(b, 1'000'000);
    auto v = validate_block(*mined, tip().block.header, *tip().state, genesis.consensus);
    ASSERT_EQ(v.size(), 1U);
    EXPECT_EQ(v[0].code, BlockError::BadCoinbase);
}

TEST_F(BlockTest, StructuralViolations) {
    auto b = mine_child(store, store.genesis_id(), {}, miner, kGenesisTime + 10);
    const auto& parent = tip();

    auto wrong_link = b;
    wrong_link.header.prev_hash = hash_bytes("x");
    EXPECT_TRUE(has_code(validate_block(wrong_link, parent.block.header, *parent.state, genesis.consensus), BlockError::BadLink));

    auto wrong_height = b;
    wrong_height.header.height = 5;
    EXPECT_TRUE(has_code(validate_block(wrong_height, parent.block.header, *parent.state, genesis.consensus),
                         BlockError::BadHeight));

    auto stale = b;
    stale.header.timestamp = kGenesisTime;
    EXPECT_TRUE(has_code(validate_block(stale, parent.block.header, *parent.state, genesis.consensus),
                         BlockError::BadTimestamp));

    auto weak = b;
    weak.header.pow_zero_bits = 1;
    EXPECT_TRUE(has_code(validate_block(weak, parent.block.header, *parent.state, genesis.consensus), BlockError::BadPoW));

    auto no_coinbase = b;
    no_coinbase.transactions.clear();
    auto v = validate_block(no_coinbase, parent.block.header, *parent.state, genesis.consensus);
    EXPECT_TRUE(has_code(v, BlockError::BadCoinbase));
    EXPECT_TRUE(has_code(v, BlockError::BadMerkle));
}

// Flip one character of one transaction's encoding (keeping it decodable):
// the merkle commitment must catch it.
TEST_F(BlockTest, MutatedTransactionIsBadMerkle) {
    auto req = make_signed(key_for("customer"), case_study_request());
    auto t = make_signed(key_for("customer"), TransferPayload{addr_of("p"), 7, "x"});
    auto b = mine_child(store, store.genesis_id(), {req, t}, miner, kGenesisTime + 10);
    std::mt19937_64 rng(1234);
    int detected = 0;
    int trials = 0;
    while (trials < 1000) {
        auto mutated = b;
        auto i = rng() % mutated.transactions.size();
        auto text = mutated.transactions[i].encode();
        auto pos = rng() % text.size();
        char c = text[pos];
        char replacement;
        if (c >= '0' && c <= '9') {
            replacement = static_cast<char>('0' + (c - '0' + 1 + rng() % 9) % 10);
        } else if (c >= 'a' && c <= 'z') {
            replacement = static_cast<char>('a' + (c - 'a' + 1 + rng() % 25) % 26);
        } else {
            continue;
        }
        text[pos] = replacement;
        try {
            mutated.transactions[i] = Transaction::from_json(canonical_decode(text));
        } catch (const std::exception&) {
            continue;
        }
        ++trials;
        auto v = validate_block(mutated, tip().block.header, *tip().state, genesis.consensus);
        detected += has_code(v, BlockError::BadMerkle);
    }
    EXPECT_EQ(detected, 1000);
}

TEST(AuthoritySeal, RoundRobinRotation) {
    auto a = key_for("auth-a");
    auto b = key_for("auth-b");
    ConsensusConfig cfg;
    cfg.mode = ConsensusMode::RoundRobinAuthority;
    cfg.pow_zero_bits = 0;
    cfg.authorities = {derive_address(a.public_key), derive_address(b.public_key)};

    auto block_at = [&](std::uint64_t h) {
        Block blk;
        blk.header.height = h;
        blk.header.miner = derive_address(a.public_key);
        return blk;
    };
    auto sealed = seal_authority(block_at(0), a, cfg);
    ASSERT_TRUE(sealed.seal);
    EXPECT_TRUE(verify_signature(sealed.seal->signer, as_bytes(sealed.header.encode()), sealed.seal->signature));
    EXPECT_THROW(seal_authority(block_at(1), a, cfg), NotYourTurnError);
    EXPECT_NO_THROW(seal_authority(block_at(2), a, cfg));
}

TEST(AuthoritySeal, ValidationChecksSchedule) {
    auto a = key_for("auth-a");
    auto b = key_for("auth-b");
    GenesisConfig g = pow_genesis();
    g.consensus.mode = ConsensusMode::RoundRobinAuthority;
    g.consensus.pow_zero_bits = 0;
    g.consensus.authorities = {derive_address(a.public_key), derive_address(b.public_key)};
    ChainStore store(g);
    const auto* gen = store.find(store.genesis_id());

    // height 1 belongs to b
    auto blk = assemble_block(gen->block.header, *gen->state, {}, derive_address(b.public_key), kGenesisTime + 5, g.consensus);
    auto sealed = seal_authority(blk, b, g.consensus);
    EXPECT_TRUE(validate_block(sealed, gen->block.header, *gen->state, g.consensus).empty());

    auto unsealed = blk;
    EXPECT_TRUE(has_code(validate_block(unsealed, gen->block.header, *gen->state, g.consensus), BlockError::BadAuthority));

    auto forged = sealed;
    forged.seal->signature.bytes[0] ^= 1;
    EXPECT_TRUE(has_code(validate_block(forged, gen->block.header, *gen->state, g.consensus), BlockError::BadAuthority));

    auto wrong_turn = assemble_block(gen->block.header, *gen->state, {}, derive_address(a.public_key), kGenesisTime + 5, g.consensus);
    wrong_turn.seal = AuthoritySeal{a.public_key, sign(a, wrong_turn.header.encode())};
    EXPECT_TRUE(has_code(validate_block(wrong_turn, gen->block.header, *gen->state, g.consensus), BlockError::BadAuthority));
}

TEST(CoinbaseReward, ConstantNoHalving) {
    ConsensusConfig cfg;
    EXPECT_EQ(coinbase_reward(1, cfg), 50);
    EXPECT_EQ(coinbase_reward(1'000'000, cfg), 50);
    cfg.block_reward = 10;
    EXPECT_EQ(coinbase_reward(1, cfg), 10);
    EXPECT_EQ(coinbase_reward(0, cfg), 0);
}

TEST(ConsensusConfig, Validation) {
    ConsensusConfig c;
    c.pow_zero_bits = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.mode = ConsensusMode::RoundRobinAuthority;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.authorities.push_back(addr_of("a"));
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(ConsensusConfig::from_json(c.to_json()), c);
}

TEST(BlockEncoding, StrictDecodeRoundTrip) {
    GenesisConfig g = pow_genesis(4);
    ChainStore store(g);
    auto b = mine_child(store, store.genesis_id(), {make_signed(key_for("customer"), case_study_request())},
                        addr_of("m"), kGenesisTime + 3);
    auto text = b.encode();
    EXPECT_EQ(Block::decode(text), b);
    EXPECT_EQ(Block::decode(text).encode(), text);
    auto upper = text;
    auto pos = upper.find("\"prev_hash\":\"") + 13;
    upper[pos] = 'A';
    EXPECT_THROW(Block::decode(upper), DecodeError);
}

}  // namespace
}  // namespace chainfab
