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

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chainfab/ledger.hpp"
#include "chainfab/merkle.hpp"
#include "chainfab/transaction.hpp"

namespace chainfab {

enum class ConsensusMode { ProofOfWork, RoundRobinAuthority };

std::string_view to_string(ConsensusMode mode);

struct ConsensusConfig {
    ConsensusMode mode = ConsensusMode::ProofOfWork;
    int pow_zero_bits = 8;
    std::vector<Address> authorities;  // rotation order, authority mode only
    Amount block_reward = 50;
    std::uint64_t finality_depth = 6;

    // Throws std::invalid_argument on an inconsistent configuration.
    void validate() const;
    [[nodiscard]] Json to_json() const;
    static ConsensusConfig from_json(const Json& j);
    bool operator==(const ConsensusConfig&) const = default;
};

/// Everything a consortium agrees on before the first block. The genesis
/// block commits to it through its merkle_root, so two instances with
/// different rosters or allocations never share a genesis id.
struct GenesisConfig {
    std::string network_id = "chainfab-test";
    UnixSeconds timestamp = 1700000000;
    std::map<Address, Amount> allocations;
    ConsensusConfig consensus;

    [[nodiscard]] Json to_json() const;
    static GenesisConfig from_json(const Json& j);
};

struct BlockHeader {
    std::uint64_t height = 0;
    Digest256 prev_hash;
    Digest256 merkle_root;
    UnixSeconds timestamp = 0;
    std::uint64_t nonce = 0;
    int pow_zero_bits = 0;
    Address miner;

    [[nodiscard]] Json to_json() const;
    static BlockHeader from_json(const Json& j);
    [[nodiscard]] std::string encode() const { return canonical_encode(to_json()); }
    [[nodiscard]] Digest256 id() const { return hash_bytes(encode()); }
    bool operator==(const BlockHeader&) const = default;
};

// Authority signature over the canonical header; kept outside the header so
// the block id does not depend on it.
struct AuthoritySeal {
    PublicKey signer;
    Signature signature;
    bool operator==(const AuthoritySeal&) const = default;
};

struct Block {
    BlockHeader header;
    std::optional<AuthoritySeal> seal;
    std::vector<Transaction> transactions;

    [[nodiscard]] Digest256 id() const { return header.id(); }
    [[nodiscard]] std::vector<Digest256> tx_ids() const;
    [[nodiscard]] Json to_json() const;
    static Block from_json(const Json& j);
    [[nodiscard]] std::string encode() const { return canonical_encode(to_json()); }
    // Strict: the text must be the canonical encoding of a block.
    static Block decode(std::string_view text);
    bool operator==(const Block&) const = default;
};

Block genesis_block(const GenesisConfig& genesis);
LedgerState genesis_state(const GenesisConfig& genesis);

// Height 0 carries allocations rather than a reward.
Amount coinbase_reward(std::uint64_t height, const ConsensusConfig& cfg);

class InvalidTransactionError : public std::invalid_argument {
  public:
    InvalidTransactionError(std::size_t index, TxRejection rejection);
    std::size_t index;
    TxRejection rejection;
};

/// Unmined block on top of parent. Throws InvalidTransactionError when a
/// transaction does not apply sequentially on state_at_parent.
Block assemble_block(const BlockHeader& parent, const LedgerState& state_at_parent, const std::vector<Transaction>& txs,
                     const Address& miner, UnixSeconds now, const ConsensusConfig& cfg);

// Timestamp a child of parent would carry when produced at now.
UnixSeconds next_block_time(const BlockHeader& parent, UnixSeconds now);

/// Deterministic nonce search from 0 upward. nullopt after max_iterations.
std::optional<Block> mine_pow(Block block, std::uint64_t max_iterations);

bool meets_pow(const BlockHeader& header);

class NotYourTurnError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

Address scheduled_authority(std::uint64_t height, const ConsensusConfig& cfg);

Block seal_authority(Block block, const KeyPair& key, const ConsensusConfig& cfg);

enum class BlockError { BadLink, BadHeight, BadTimestamp, BadPoW, BadAuthority, BadMerkle, BadCoinbase, InvalidTransaction };

std::string_view to_string(BlockError e);

struct BlockViolation {
    BlockError code;
    std::string detail;
    std::optional<std::size_t> tx_index;
};

struct BlockEvaluation {
    std::vector<BlockViolation> violations;
    LedgerState post_state;  // meaningful only when violations is empty
    [[nodiscard]] bool ok() const { return violations.empty(); }
};

// Consensus checks that need no ledger state: PoW or authority seal, merkle
// root, coinbase placement, transaction signatures.
std::vector<BlockViolation> check_block_standalone(const Block& block, const ConsensusConfig& cfg);

/// Full validation against the parent and the ledger state after it. Returns
/// every violation found together with the successor state.
BlockEvaluation evaluate_block(const Block& block, const BlockHeader& parent, const LedgerState& state_at_parent,
                               const ConsensusConfig& cfg);

std::vector<BlockViolation> validate_block(const Block& block, const BlockHeader& parent,
                                           const LedgerState& state_at_parent, const ConsensusConfig& cfg);

// Checks a candidate genesis block against the agreed configuration.
std::vector<BlockViolation> validate_genesis(const Block& block, const GenesisConfig& genesis);

}  // namespace chainfab
