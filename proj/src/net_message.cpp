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

#include "chainfab/net_message.hpp"

#include <array>

namespace chainfab {

namespace {

constexpr std::array<std::string_view, 8> kMsgNames = {"Hello",     "PeerList", "TxGossip", "BlockGossip",
                                                       "GetBlocks", "Blocks",   "Ping",     "Pong"};

NetMessage make(MsgKind kind, const std::string& network_id, const Address& sender, Json payload) {
    NetMessage m;
    m.kind = kind;
    m.payload = std::move(payload);
    m.sender = sender;
    m.network_id = network_id;
    return m;
}

Json tip_json(const TipPayload& p) { return Json{{"tip_height", p.tip_height}, {"tip_id", p.tip_id.hex()}}; }

void require_kind(const NetMessage& m, MsgKind kind) {
    if (m.kind != kind) throw DecodeError("expected a " + std::string(to_string(kind)) + " message");
}

std::optional<InboundReject> classify(const std::vector<BlockViolation>& violations, std::string& detail) {
    if (violations.empty()) return std::nullopt;
    const auto& v = violations.front();
    detail = std::string(to_string(v.code)) + ": " + v.detail;
    switch (v.code) {
        case BlockError::BadPoW:
            return InboundReject::BadPoW;
        case BlockError::BadAuthority:
            return InboundReject::BadAuthority;
        case BlockError::BadMerkle:
            return InboundReject::BadMerkle;
        case BlockError::BadCoinbase:
            return InboundReject::BadCoinbase;
        case BlockError::InvalidTransaction:
            return v.detail == "BadSignature" ? InboundReject::BadSignature : InboundReject::InvalidTransaction;
        default:
            return InboundReject::InvalidTransaction;
    }
}

}  // namespace

std::string_view to_string(MsgKind kind) { return kMsgNames.at(static_cast<std::size_t>(kind)); }

std::optional<MsgKind> parse_msg_kind(std::string_view name) {
    for (std::size_t i = 0; i < kMsgNames.size(); ++i) {
        if (kMsgNames[i] == name) return static_cast<MsgKind>(i);
    }
    return std::nullopt;
}

Json NetMessage::to_json() const {
    return Json{{"kind", std::string(to_string(kind))},
                {"payload", payload},
                {"sender", sender.to_string()},
                {"network_id", network_id}};
}

NetMessage NetMessage::from_json(const Json& j) {
    namespace jf = json_field;
    jf::expect_keys(j, {"kind", "network_id", "payload", "sender"});
    auto kind = parse_msg_kind(jf::string(j, "kind"));
    if (!kind) throw DecodeError("unknown message kind");
    NetMessage m;
    m.kind = *kind;
    m.payload = j.at("payload");
    if (!m.payload.is_object()) throw DecodeError("payload must be an object");
    m.sender = jf::address(j, "sender");
    m.network_id = jf::string(j, "network_id");
    return m;
}

NetMessage NetMessage::decode(std::string_view bytes) { return from_json(canonical_decode(bytes)); }

Digest256 NetMessage::dedup_key() const {
    Json j = to_json();
    j.erase("sender");
    return canonical_hash(j);
}

NetMessage NetMessage::hello(const std::string& network_id, const Address& sender, const HelloPayload& p) {
    return make(MsgKind::Hello, network_id, sender,
                Json{{"genesis_id", p.genesis_id.hex()},
                     {"tip_height", p.tip_height},
                     {"tip_id", p.tip_id.hex()},
                     {"version", p.version},
                     {"listen", p.listen}});
}

NetMessage NetMessage::peer_list(const std::string& network_id, const Address& sender, const std::vector<PeerInfo>& peers) {
    Json arr = Json::array();
    for (const auto& p : peers) arr.push_back(Json{{"node_id", p.node_id.to_string()}, {"endpoint", p.endpoint}});
    return make(MsgKind::PeerList, network_id, sender, Json{{"peers", arr}});
}

NetMessage NetMessage::tx_gossip(const std::string& network_id, const Address& sender, const Transaction& tx) {
    return make(MsgKind::TxGossip, network_id, sender, Json{{"tx", tx.to_json()}});
}

NetMessage NetMessage::block_gossip(const std::string& network_id, const Address& sender, const Block& block) {
    return make(MsgKind::BlockGossip, network_id, sender, Json{{"block", block.to_json()}});
}

NetMessage NetMessage::get_blocks(const std::string& network_id, const Address& sender, const GetBlocksPayload& p) {
    return make(MsgKind::GetBlocks, network_id, sender, Json{{"from_height", p.from_height}, {"limit", p.limit}});
}

NetMessage NetMessage::blocks(const std::string& network_id, const Address& sender, const std::vector<Block>& blocks) {
    Json arr = Json::array();
    for (const auto& b : blocks) arr.push_back(b.to_json());
    return make(MsgKind::Blocks, network_id, sender, Json{{"blocks", arr}});
}

NetMessage NetMessage::ping(const std::string& network_id, const Address& sender, const TipPayload& p) {
    return make(MsgKind::Ping, network_id, sender, tip_json(p));
}

NetMessage NetMessage::pong(const std::string& network_id, const Address& sender, const TipPayload& p) {
    return make(MsgKind::Pong, network_id, sender, tip_json(p));
}

HelloPayload NetMessage::as_hello() const {
    namespace jf = json_field;
    require_kind(*this, MsgKind::Hello);
    jf::expect_keys(payload, {"genesis_id", "listen", "tip_height", "tip_id", "version"});
    return HelloPayload{jf::fixed<Digest256>(payload, "genesis_id"), jf::uint64(payload, "tip_height"),
                        jf::fixed<Digest256>(payload, "tip_id"), jf::string(payload, "version"),
                        jf::string(payload, "listen")};
}

std::vector<PeerInfo> NetMessage::as_peer_list() const {
    namespace jf = json_field;
    require_kind(*this, MsgKind::PeerList);
    jf::expect_keys(payload, {"peers"});
    const auto& arr = payload.at("peers");
    if (!arr.is_array()) throw DecodeError("peers must be an array");
    std::vector<PeerInfo> out;
    for (const auto& p : arr) {
        jf::expect_keys(p, {"endpoint", "node_id"});
        out.push_back({jf::address(p, "node_id"), jf::string(p, "endpoint")});
    }
    return out;
}

Transaction NetMessage::as_tx() const {
    require_kind(*this, MsgKind::TxGossip);
    json_field::expect_keys(payload, {"tx"});
    return Transaction::from_json(payload.at("tx"));
}

Block NetMessage::as_block() const {
    require_kind(*this, MsgKind::BlockGossip);
    json_field::expect_keys(payload, {"block"});
    return Block::from_json(payload.at("block"));
}

GetBlocksPayload NetMessage::as_get_blocks() const {
    namespace jf = json_field;
    require_kind(*this, MsgKind::GetBlocks);
    jf::expect_keys(payload, {"from_height", "limit"});
    return GetBlocksPayload{jf::uint64(payload, "from_height"), jf::uint64(payload, "limit")};
}

std::vector<Block> NetMessage::as_blocks() const {
    require_kind(*this, MsgKind::Blocks);
    json_field::expect_keys(payload, {"blocks"});
    const auto& arr = payload.at("blocks");
    if (!arr.is_array()) throw DecodeError("blocks must be an array");
    if (arr.size() > kMaxBlocksPerBatch) throw DecodeError("too many blocks in one batch");
    std::vector<Block> out;
    for (const auto& b : arr) out.push_back(Block::from_json(b));
    return out;
}

TipPayload NetMessage::as_tip() const {
    namespace jf = json_field;
    if (kind != MsgKind::Ping && kind != MsgKind::Pong) throw DecodeError("expected Ping or Pong");
    jf::expect_keys(payload, {"tip_height", "tip_id"});
    return TipPayload{jf::uint64(payload, "tip_height"), jf::fixed<Digest256>(payload, "tip_id")};
}

std::string encode_frame(std::string_view payload) {
    if (payload.size() > kMaxFrameBytes) throw FrameError("frame too large");
    auto n = static_cast<std::uint32_t>(payload.size());
    std::string out;
    out.reserve(4 + payload.size());
    out.push_back(static_cast<char>((n >> 24) & 0xff));
    out.push_back(static_cast<char>((n >> 16) & 0xff));
    out.push_back(static_cast<char>((n >> 8) & 0xff));
    out.push_back(static_cast<char>(n & 0xff));
    out.append(payload);
    return out;
}

void FrameDecoder::feed(std::string_view bytes) { buffer_.append(bytes); }

std::optional<std::string> FrameDecoder::next() {
    if (buffer_.size() < 4) return std::nullopt;
    auto byte = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer_[i])); };
    std::uint32_t n = (byte(0) << 24) | (byte(1) << 16) | (byte(2) << 8) | byte(3);
    if (n > kMaxFrameBytes) throw FrameError("announced frame length " + std::to_string(n) + " exceeds limit");
    if (buffer_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
    std::string frame = buffer_.substr(4, n);
    buffer_.erase(0, 4 + static_cast<std::size_t>(n));
    return frame;
}

std::string_view to_string(InboundReject r) {
    static constexpr std::array<std::string_view, 8> names = {"MalformedMessage", "NetworkMismatch", "BadSignature",
                                                              "BadCoinbase",      "BadPoW",          "BadAuthority",
                                                              "BadMerkle",        "InvalidTransaction"};
    return names.at(static_cast<std::size_t>(r));
}

InboundVerdict verify_inbound(std::string_view bytes, const InboundContext& ctx) {
    InboundVerdict verdict;
    NetMessage msg;
    try {
        msg = NetMessage::decode(bytes);
        if (msg.network_id != ctx.network_id) {
            verdict.reject = InboundReject::NetworkMismatch;
            verdict.detail = "network \"" + msg.network_id + "\"";
            return verdict;
        }
        switch (msg.kind) {
            case MsgKind::Hello:
                (void)msg.as_hello();
                break;
            case MsgKind::PeerList:
                (void)msg.as_peer_list();
                break;
            case MsgKind::GetBlocks:
                (void)msg.as_get_blocks();
                break;
            case MsgKind::Ping:
            case MsgKind::Pong:
                (void)msg.as_tip();
                break;
            case MsgKind::TxGossip: {
                auto tx = msg.as_tx();
                if (tx.kind() == TxKind::Coinbase) {
                    verdict.reject = InboundReject::BadCoinbase;
                    verdict.detail = "coinbase transactions are never gossiped";
                    return verdict;
                }
                if (!tx.signature_valid()) {
                    verdict.reject = InboundReject::BadSignature;
                    return verdict;
                }
                break;
            }
            case MsgKind::BlockGossip: {
                verdict.reject = classify(check_block_standalone(msg.as_block(), ctx.consensus), verdict.detail);
                if (verdict.reject) return verdict;
                break;
            }
            case MsgKind::Blocks: {
                for (const auto& b : msg.as_blocks()) {
                    verdict.reject = classify(check_block_standalone(b, ctx.consensus), verdict.detail);
                    if (verdict.reject) return verdict;
                }
                break;
            }
        }
    } catch (const std::exception& e) {
        verdict.reject = InboundReject::MalformedMessage;
        verdict.detail = e.what();
        return verdict;
    }
    verdict.message = std::move(msg);
    return verdict;
}

}  // namespace chainfab
