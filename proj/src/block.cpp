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

#include "chainfab/block.hpp"

#include <algorithm>
#include <array>

#include <sodium.h>

namespace chainfab {

namespace {

std::optional<BlockViolation> check_seal(const Block& block, const ConsensusConfig& cfg) {
    const auto& h = block.header;
    if (cfg.mode == ConsensusMode::ProofOfWork) {
        if (block.seal) return BlockViolation{BlockError::BadAuthority, "authority seal on a PoW block", {}};
        if (h.pow_zero_bits != cfg.pow_zero_bits) {
            return BlockViolation{BlockError::BadPoW,
                                  "difficulty " + std::to_string(h.pow_zero_bits) + " != configured " +
                                      std::to_string(cfg.pow_zero_bits),
                                  {}};
        }
        if (!meets_pow(h)) return BlockViolation{BlockError::BadPoW, "block id misses the work target", {}};
        return std::nullopt;
    }
    if (h.pow_zero_bits != 0 || h.nonce != 0) {
        return BlockViolation{BlockError::BadAuthority, "authority blocks carry no proof of work", {}};
    }
    if (cfg.authorities.empty()) return BlockViolation{BlockError::BadAuthority, "empty authority roster", {}};
    auto expected = scheduled_authority(h.height, cfg);
    if (h.miner != expected) return BlockViolation{BlockError::BadAuthority, "miner is not the scheduled authority", {}};
    if (!block.seal) return BlockViolation{BlockError::BadAuthority, "missing authority seal", {}};
    if (derive_address(block.seal->signer) != expected) {
        return BlockViolation{BlockError::BadAuthority, "seal signer is not the scheduled authority", {}};
    }
    if (!verify_signature(block.seal->signer, as_bytes(h.encode()), block.seal->signature)) {
        return BlockViolation{BlockError::BadAuthority, "seal signature does not verify", {}};
    }
    return std::nullopt;
}

std::optional<BlockViolation> check_merkle(const Block& block) {
    auto ids = block.tx_ids();
    if (merkle_root(ids) != block.header.merkle_root) {
        return BlockViolation{BlockError::BadMerkle, "merkle_root does not commit to the transactions", {}};
    }
    return std::nullopt;
}

void check_coinbase_placement(const Block& block, std::vector<BlockViolation>& out) {
    const auto& txs = block.transactions;
    if (txs.empty() || txs.front().kind() != TxKind::Coinbase) {
        out.push_back({BlockError::BadCoinbase, "first transaction must be the coinbase", 0});
    }
    for (std::size_t i = 1; i < txs.size(); ++i) {
        if (txs[i].kind() == TxKind::Coinbase) out.push_back({BlockError::BadCoinbase, "extra coinbase", i});
    }
}

}  // namespace

std::string_view to_string(ConsensusMode mode) {
    return mode == ConsensusMode::ProofOfWork ? "pow" : "authority";
}

void ConsensusConfig::validate() const {
    if (mode == ConsensusMode::ProofOfWork && (pow_zero_bits < 1 || pow_zero_bits > 64)) {
        throw std::invalid_argument("PoW mode requires 1 <= pow_zero_bits <= 64");
    }
    if (mode == ConsensusMode::RoundRobinAuthority && authorities.empty()) {
        throw std::invalid_argument("authority mode requires a non-empty roster");
    }
    if (block_reward < 0) throw std::invalid_argument("block_reward must be non-negative");
}

Json ConsensusConfig::to_json() const {
    Json roster = Json::array();
    for (const auto& a : authorities) roster.push_back(a.to_string());
    return Json{{"mode", std::string(to_string(mode))},
                {"pow_zero_bits", pow_zero_bits},
                {"authorities", roster},
                {"block_reward", block_reward},
                {"finality_depth", finality_depth}};
}

ConsensusConfig ConsensusConfig::from_json(const Json& j) {
    namespace jf = json_field;
    ConsensusConfig c;
    auto mode = jf::string(j, "mode");
    if (mode == "pow") {
        c.mode = ConsensusMode::ProofOfWork;
    } else if (mode == "authority") {
        c.mode = ConsensusMode::RoundRobinAuthority;
    } else {
        throw DecodeError("consensus mode must be \"pow\" or \"authority\"");
    }
    if (j.contains("pow_zero_bits")) c.pow_zero_bits = static_cast<int>(jf::int64(j, "pow_zero_bits"));
    if (c.mode == ConsensusMode::RoundRobinAuthority && !j.contains("pow_zero_bits")) c.pow_zero_bits = 0;
    if (j.contains("authorities")) {
        const auto& roster = jf::require(j, "authorities");
        if (!roster.is_array()) throw DecodeError("authorities must be an array");
        for (const auto& a : roster) {
            if (!a.is_string()) throw DecodeError("authority entries must be addresses");
            try {
                c.authorities.push_back(Address::parse(a.get<std::string>()));
            } catch (const HexError& e) {
                throw DecodeError(std::string("authorities: ") + e.what());
            }
        }
    }
    if (j.contains("block_reward")) c.block_reward = jf::int64(j, "block_reward");
    if (j.contains("finality_depth")) c.finality_depth = jf::uint64(j, "finality_depth");
    return c;
}

Json GenesisConfig::to_json() const {
    Json alloc = Json::object();
    for (const auto& [a, amount] : allocations) alloc[a.to_string()] = amount;
    return Json{{"network_id", network_id}, {"timestamp", timestamp}, {"allocations", alloc}, {"consensus", consensus.to_json()}};
}

GenesisConfig GenesisConfig::from_json(const Json& j) {
    namespace jf = json_field;
    GenesisConfig g;
    g.network_id = jf::string(j, "network_id");
    g.timestamp = jf::int64(j, "timestamp");
    if (j.contains("allocations")) {
        const auto& alloc = jf::require(j, "allocations");
        if (!alloc.is_object()) throw DecodeError("allocations must be an object");
        for (const auto& [key, value] : alloc.items()) {
            if (!value.is_number_integer()) throw DecodeError("allocation amounts must be integers");
            try {
                g.allocations[Address::parse(key)] = value.get<Amount>();
            } catch (const HexError& e) {
                throw DecodeError(std::string("allocations: ") + e.what());
            }
        }
    }
    if (j.contains("consensus")) g.consensus = ConsensusConfig::from_json(j.at("consensus"));
    return g;
}

Json BlockHeader::to_json() const {
    return Json{{"height", height},         {"prev_hash", prev_hash.hex()},     {"merkle_root", merkle_root.hex()},
                {"timestamp", timestamp},   {"nonce", nonce},                   {"pow_zero_bits", pow_zero_bits},
                {"miner", miner.to_string()}};
}

BlockHeader BlockHeader::from_json(const Json& j) {
    namespace jf = json_field;
    jf::expect_keys(j, {"height", "merkle_root", "miner", "nonce", "pow_zero_bits", "prev_hash", "timestamp"});
    BlockHeader h;
    h.height = jf::uint64(j, "height");
    h.prev_hash = jf::fixed<Digest256>(j, "prev_hash");
    h.merkle_root = jf::fixed<Digest256>(j, "merkle_root");
    h.timestamp = jf::int64(j, "timestamp");
    h.nonce = jf::uint64(j, "nonce");
    auto bits = jf::uint64(j, "pow_zero_bits");
    if (bits > 256) throw DecodeError("pow_zero_bits out of range");
    h.pow_zero_bits = static_cast<int>(bits);
    h.miner = jf::address(j, "miner");
    return h;
}

std::vector<Digest256> Block::tx_ids() const {
    std::vector<Digest256> ids;
    ids.reserve(transactions.size());
    for (const auto& tx : transactions) ids.push_back(tx.id());
    return ids;
}

Json Block::to_json() const {
    Json txs = Json::array();
    for (const auto& tx : transactions) txs.push_back(tx.to_json());
    Json j{{"header", header.to_json()}, {"transactions", txs}};
    if (seal) j["seal"] = Json{{"signer", seal->signer.hex()}, {"signature", seal->signature.hex()}};
    return j;
}

Block Block::from_json(const Json& j) {
    namespace jf = json_field;
    Block b;
    if (j.contains("seal")) {
        jf::expect_keys(j, {"header", "seal", "transactions"});
        const auto& s = j.at("seal");
        jf::expect_keys(s, {"signature", "signer"});
        b.seal = AuthoritySeal{jf::fixed<PublicKey>(s, "signer"), jf::fixed<Signature>(s, "signature")};
    } else {
        jf::expect_keys(j, {"header", "transactions"});
    }
    b.header = BlockHeader::from_json(j.at("header"));
    const auto& txs = j.at("transactions");
    if (!txs.is_array()) throw DecodeError("transactions must be an array");
    for (const auto& t : txs) b.transactions.push_back(Transaction::from_json(t));
    return b;
}

Block Block::decode(std::string_view text) { return from_json(canonical_decode(text)); }

Block genesis_block(const GenesisConfig& genesis) {
    Block b;
    b.header.height = 0;
    b.header.merkle_root = canonical_hash(genesis.to_json());
    b.header.timestamp = genesis.timestamp;
    return b;
}

LedgerState genesis_state(const GenesisConfig& genesis) { return LedgerState::from_allocations(genesis.allocations); }

Amount coinbase_reward(std::uint64_t height, const ConsensusConfig& cfg) { return height == 0 ? 0 : cfg.block_reward; }

InvalidTransactionError::InvalidTransactionError(std::size_t i, TxRejection r)
    : std::invalid_argument("transaction " + std::to_string(i) + ": " + std::string(to_string(r.code)) + " " + r.detail),
      index(i),
      rejection(std::move(r)) {}

UnixSeconds next_block_time(const BlockHeader& parent, UnixSeconds now) { return std::max(now, parent.timestamp + 1); }

Block assemble_block(const BlockHeader& parent, const LedgerState& state_at_parent, const std::vector<Transaction>& txs,
                     const Address& miner, UnixSeconds now, const ConsensusConfig& cfg) {
    Block b;
    b.header.height = parent.height + 1;
    b.header.prev_hash = parent.id();
    b.header.timestamp = next_block_time(parent, now);
    b.header.nonce = 0;
    b.header.pow_zero_bits = cfg.mode == ConsensusMode::ProofOfWork ? cfg.pow_zero_bits : 0;
    b.header.miner = miner;

    LedgerState scratch = state_at_parent;
    auto coinbase = make_coinbase(b.header.height, miner, coinbase_reward(b.header.height, cfg));
    TxContext cb_ctx{b.header.timestamp, CoinbaseSlot{b.header.height, miner, cfg.block_reward}};
    if (auto r = try_apply(scratch, coinbase, cb_ctx)) throw InvalidTransactionError(0, *r);
    b.transactions.push_back(std::move(coinbase));

    TxContext ctx{b.header.timestamp, std::nullopt};
    for (std::size_t i = 0; i < txs.size(); ++i) {
        if (auto r = try_apply(scratch, txs[i], ctx)) throw InvalidTransactionError(i + 1, *r);
        b.transactions.push_back(txs[i]);
    }
    b.header.merkle_root = merkle_root(b.tx_ids());
    return b;
}

bool meets_pow(const BlockHeader& header) { return leading_zero_bits(header.id()) >= header.pow_zero_bits; }

std::optional<Block> mine_pow(Block block, std::uint64_t max_iterations) {
    // The canonical header is prefix + decimal nonce + suffix; hash the prefix once.
    block.header.nonce = 0;
    const std::string encoded = block.header.encode();
    const std::string marker = "\"nonce\":0";
    auto pos = encoded.find(marker);
    const std::string prefix = encoded.substr(0, pos + marker.size() - 1);
    const std::string suffix = encoded.substr(pos + marker.size());
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
    crypto_hash_sha256_state base;
    crypto_hash_sha256_init(&base);
    crypto_hash_sha256_update(&base, reinterpret_cast<const unsigned char*>(prefix.data()), prefix.size());

    const int target = block.header.pow_zero_bits;
    for (std::uint64_t nonce = 0; nonce < max_iterations; ++nonce) {
        auto digits = std::to_string(nonce);
        crypto_hash_sha256_state st = base;
        crypto_hash_sha256_update(&st, reinterpret_cast<const unsigned char*>(digits.data()), digits.size());
        crypto_hash_sha256_update(&st, reinterpret_cast<const unsigned char*>(suffix.data()), suffix.size());
        Digest256 d;
        crypto_hash_sha256_final(&st, d.bytes.data());
        if (leading_zero_bits(d) >= target) {
            block.header.nonce = nonce;
            return block;
        }
    }
    return std::nullopt;
}

Address scheduled_authority(std::uint64_t height, const ConsensusConfig& cfg) {
    if (cfg.authorities.empty()) throw std::invalid_argument("empty authority roster");
    return cfg.authorities[height % cfg.authorities.size()];
}

Block seal_authority(Block block, const KeyPair& key, const ConsensusConfig& cfg) {
    if (cfg.mode != ConsensusMode::RoundRobinAuthority) throw std::invalid_argument("seal_authority needs authority mode");
    auto signer = derive_address(key.public_key);
    if (signer != scheduled_authority(block.header.height, cfg)) {
        throw NotYourTurnError("height " + std::to_string(block.header.height) + " is scheduled for " +
                               scheduled_authority(block.header.height, cfg).to_string());
    }
    if (block.header.miner != signer) throw std::invalid_argument("block miner must be the sealing authority");
    block.header.nonce = 0;
    block.seal = AuthoritySeal{key.public_key, sign(key, block.header.encode())};
    return block;
}

std::string_view to_string(BlockError e) {
    static constexpr std::array<std::string_view, 8> names = {"BadLink",      "BadHeight", "BadTimestamp", "BadPoW",
                                                              "BadAuthority", "BadMerkle", "BadCoinbase",  "InvalidTransaction"};
    return names.at(static_cast<std::size_t>(e));
}

std::vector<BlockViolation> check_block_standalone(const Block& block, const ConsensusConfig& cfg) {
    std::vector<BlockViolation> out;
    if (auto v = check_seal(block, cfg)) out.push_back(*v);
    if (auto v = check_merkle(block)) out.push_back(*v);
    check_coinbase_placement(block, out);
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
        const auto& tx = block.transactions[i];
        if (tx.kind() != TxKind::Coinbase && !tx.signature_valid()) {
            out.push_back({BlockError::InvalidTransaction, "BadSignature", i});
        }
    }
    return out;
}

BlockEvaluation evaluate_block(const Block& block, const BlockHeader& parent, const LedgerState& state_at_parent,
                               const ConsensusConfig& cfg) {
    BlockEvaluation ev;
    auto& out = ev.violations;
    const auto& h = block.header;
    if (h.prev_hash != parent.id()) out.push_back({BlockError::BadLink, "prev_hash does not match the parent id", {}});
    if (h.height != parent.height + 1) {
        out.push_back({BlockError::BadHeight, "height " + std::to_string(h.height) + " after parent " +
                                                  std::to_string(parent.height), {}});
    }
    if (h.timestamp <= parent.timestamp) out.push_back({BlockError::BadTimestamp, "timestamp not after parent", {}});
    if (auto v = check_seal(block, cfg)) out.push_back(*v);
    if (auto v = check_merkle(block)) out.push_back(*v);
    check_coinbase_placement(block, out);

    ev.post_state = state_at_parent;
    auto& state = ev.post_state;
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
        const auto& tx = block.transactions[i];
        bool is_coinbase = tx.kind() == TxKind::Coinbase;
        if (is_coinbase && i != 0) continue;  // reported by the placement check
        TxContext ctx{h.timestamp, std::nullopt};
        if (i == 0 && is_coinbase) ctx.coinbase_slot = CoinbaseSlot{h.height, h.miner, coinbase_reward(h.height, cfg)};
        if (auto r = try_apply(state, tx, ctx)) {
            auto code = r->code == TxError::BadCoinbase ? BlockError::BadCoinbase : BlockError::InvalidTransaction;
            out.push_back({code, std::string(to_string(r->code)) + ": " + r->detail, i});
        }
    }
    expire_requests_in_place(state, h.timestamp);
    state.height = h.height;
    return ev;
}

std::vector<BlockViolation> validate_block(const Block& block, const BlockHeader& parent,
                                           const LedgerState& state_at_parent, const ConsensusConfig& cfg) {
    return evaluate_block(block, parent, state_at_parent, cfg).violations;
}

std::vector<BlockViolation> validate_genesis(const Block& block, const GenesisConfig& genesis) {
    std::vector<BlockViolation> out;
    const auto& h = block.header;
    if (h.height != 0) out.push_back({BlockError::BadHeight, "genesis height must be 0", {}});
    if (!h.prev_hash.is_zero()) out.push_back({BlockError::BadLink, "genesis prev_hash must be zero", {}});
    if (!block.transactions.empty()) out.push_back({BlockError::BadCoinbase, "genesis carries no transactions", {}});
    if (block.seal || h.nonce != 0 || h.pow_zero_bits != 0) out.push_back({BlockError::BadPoW, "genesis is unsealed", {}});
    if (h.merkle_root != canonical_hash(genesis.to_json())) {
        out.push_back({BlockError::BadMerkle, "genesis does not commit to this configuration", {}});
    }
    if (h.timestamp != genesis.timestamp) out.push_back({BlockError::BadTimestamp, "genesis timestamp mismatch", {}});
    return out;
}

}  // namespace chainfab
