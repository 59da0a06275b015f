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

#include "chainfab/peers.hpp"

namespace chainfab {

PeerTable::AddResult PeerTable::upsert(const Address& node_id, PeerRecord record) {
    if (bans_.contains(node_id)) return AddResult::Banned;
    auto it = peers_.find(node_id);
    if (it != peers_.end()) {
        record.score = it->second.score;
        it->second = std::move(record);
        return AddResult::Updated;
    }
    if (peers_.size() >= max_peers_) return AddResult::Full;
    peers_.emplace(node_id, std::move(record));
    return AddResult::Added;
}

bool PeerTable::penalize(const Address& node_id, int amount) {
    auto it = peers_.find(node_id);
    if (it == peers_.end()) return false;
    it->second.score -= amount;
    if (it->second.score <= 0) {
        ban(node_id);
        return true;
    }
    return false;
}

void PeerTable::ban(const Address& node_id) {
    bans_.insert(node_id);
    peers_.erase(node_id);
}

PeerRecord* PeerTable::find(const Address& node_id) {
    auto it = peers_.find(node_id);
    return it == peers_.end() ? nullptr : &it->second;
}

const PeerRecord* PeerTable::find(const Address& node_id) const {
    auto it = peers_.find(node_id);
    return it == peers_.end() ? nullptr : &it->second;
}

std::optional<Address> PeerTable::by_endpoint(const std::string& endpoint) const {
    for (const auto& [id, rec] : peers_) {
        if (rec.endpoint == endpoint) return id;
    }
    return std::nullopt;
}

bool DedupCache::insert(const Digest256& key) {
    if (!keys_.insert(key).second) return false;
    order_.push_back(key);
    while (order_.size() > capacity_) {
        keys_.erase(order_.front());
        order_.pop_front();
    }
    return true;
}

std::string_view to_string(HandshakeError e) {
    switch (e) {
        case HandshakeError::NetworkMismatch:
            return "NetworkMismatch";
        case HandshakeError::Timeout:
            return "Timeout";
        case HandshakeError::Banned:
            return "Banned";
    }
    return "?";
}

HandshakeOutcome evaluate_hello(const NetMessage& hello, const std::string& network_id, const Digest256& genesis_id,
                                const PeerTable& peers) {
    if (hello.network_id != network_id) {
        return {HandshakeError::NetworkMismatch, "peer network \"" + hello.network_id + "\""};
    }
    HelloPayload p;
    try {
        p = hello.as_hello();
    } catch (const DecodeError& e) {
        return {HandshakeError::NetworkMismatch, e.what()};
    }
    if (p.genesis_id != genesis_id) return {HandshakeError::NetworkMismatch, "different genesis"};
    if (peers.is_banned(hello.sender)) return {HandshakeError::Banned, hello.sender.to_string()};
    return {};
}

}  // namespace chainfab
