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
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chainfab/block.hpp"

namespace chainfab {

enum class MsgKind { Hello, PeerList, TxGossip, BlockGossip, GetBlocks, Blocks, Ping, Pong };

std::string_view to_string(MsgKind kind);
std::optional<MsgKind> parse_msg_kind(std::string_view name);

constexpr std::string_view kSoftwareVersion = "chainfab/0.1.0";
constexpr std::size_t kMaxBlocksPerBatch = 100;

struct HelloPayload {
    Digest256 genesis_id;
    std::uint64_t tip_height = 0;
    Digest256 tip_id;
    std::string version{kSoftwareVersion};
    std::string listen;  // dialable endpoint of the sender, may be empty
};

struct PeerInfo {
    Address node_id;
    std::string endpoint;
};

struct TipPayload {
    std::uint64_t tip_height = 0;
    Digest256 tip_id;
};

struct GetBlocksPayload {
    std::uint64_t from_height = 0;
    std::uint64_t limit = kMaxBlocksPerBatch;
};

/// Wire envelope. The payload layout depends on kind; typed constructors and
/// accessors below build and read it.
struct NetMessage {
    MsgKind kind = MsgKind::Ping;
    Json payload = Json::object();
    Address sender;
    std::string network_id;

    [[nodiscard]] Json to_json() const;
    static NetMessage from_json(const Json& j);
    [[nodiscard]] std::string encode() const { return canonical_encode(to_json()); }
    static NetMessage decode(std::string_view bytes);

    /// Dedup key: hash of the canonical message with the sender removed, so
    /// the same payload relayed by different peers collapses to one entry.
    [[nodiscard]] Digest256 dedup_key() const;

    static NetMessage hello(const std::string& network_id, const Address& sender, const HelloPayload& p);
    static NetMessage peer_list(const std::string& network_id, const Address& sender, const std::vector<PeerInfo>& peers);
    static NetMessage tx_gossip(const std::string& network_id, const Address& sender, const Transaction& tx);
    static NetMessage block_gossip(const std::string& network_id, const Address& sender, const Block& block);
    static NetMessage get_blocks(const std::string& network_id, const Address& sender, const GetBlocksPayload& p);
    static NetMessage blocks(const std::string& network_id, const Address& sender, const std::vector<Block>& blocks);
    static NetMessage ping(const std::string& network_id, const Address& sender, const TipPayload& p);
    static NetMessage pong(const std::string& network_id, const Address& sender, const TipPayload& p);

    [[nodiscard]] HelloPayload as_hello() const;
    [[nodiscard]] std::vector<PeerInfo> as_peer_list() const;
    [[nodiscard]] Transaction as_tx() const;
    [[nodiscard]] Block as_block() const;
    [[nodiscard]] GetBlocksPayload as_get_blocks() const;
    [[nodiscard]] std::vector<Block> as_blocks() const;
    [[nodiscard]] TipPayload as_tip() const;
};

// Stream framing: 4-byte big-endian length, then the canonical message.
constexpr std::size_t kMaxFrameBytes = 16U << 20;

std::string encode_frame(std::string_view payload);

class FrameError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class FrameDecoder {
  public:
    void feed(std::string_view bytes);
    // Next complete frame, if any. Throws FrameError on an oversized length.
    std::optional<std::string> next();

  private:
    std::string buffer_;
};

enum class InboundReject {
    MalformedMessage,
    NetworkMismatch,
    BadSignature,
    BadCoinbase,
    BadPoW,
    BadAuthority,
    BadMerkle,
    InvalidTransaction,
};

std::string_view to_string(InboundReject r);

struct InboundContext {
    std::string network_id;
    ConsensusConfig consensus;
};

struct InboundVerdict {
    std::optional<InboundReject> reject;
    std::string detail;
    std::optional<NetMessage> message;

    [[nodiscard]] bool accepted() const { return !reject; }
};

/// Structural and stateless checks on raw bytes from a peer: decoding,
/// network id, transaction signatures, and block PoW / seal / merkle root.
/// Stateful checks happen when the payload is applied.
InboundVerdict verify_inbound(std::string_view bytes, const InboundContext& ctx);

}  // namespace chainfab
