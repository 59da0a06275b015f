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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "chainfab/net_message.hpp"

namespace chainfab {

using Millis = std::int64_t;

constexpr int kInitialPeerScore = 100;
constexpr int kInvalidMessagePenalty = 10;
constexpr std::size_t kDefaultMaxPeers = 32;

struct PeerRecord {
    std::string endpoint;
    Millis last_seen = 0;
    int score = kInitialPeerScore;
    std::uint64_t tip_height = 0;
    Digest256 tip_id;
    std::string listen;
};

/// Connected peers keyed by node id. Banned ids never appear in peers().
class PeerTable {
  public:
    explicit PeerTable(std::size_t max_peers = kDefaultMaxPeers) : max_peers_(max_peers) {}

    enum class AddResult { Added, Updated, Banned, Full };

    AddResult upsert(const Address& node_id, PeerRecord record);
    void remove(const Address& node_id) { peers_.erase(node_id); }

    // Returns true when the peer got banned by this penalty.
    bool penalize(const Address& node_id, int amount = kInvalidMessagePenalty);
    void ban(const Address& node_id);

    [[nodiscard]] bool is_banned(const Address& node_id) const { return bans_.contains(node_id); }
    [[nodiscard]] PeerRecord* find(const Address& node_id);
    [[nodiscard]] const PeerRecord* find(const Address& node_id) const;
    [[nodiscard]] std::optional<Address> by_endpoint(const std::string& endpoint) const;
    [[nodiscard]] const std::map<Address, PeerRecord>& peers() const { return peers_; }
    [[nodiscard]] const std::set<Address>& bans() const { return bans_; }
    [[nodiscard]] std::size_t size() const { return peers_.size(); }
    [[nodiscard]] std::size_t capacity() const { return max_peers_; }

  private:
    std::size_t max_peers_;
    std::map<Address, PeerRecord> peers_;
    std::set<Address> bans_;
};

/// Bounded FIFO set of message keys already seen.
class DedupCache {
  public:
    explicit DedupCache(std::size_t capacity = 10'000) : capacity_(capacity) {}

    // Records key; false if it was already present.
    bool insert(const Digest256& key);
    [[nodiscard]] bool contains(const Digest256& key) const { return keys_.contains(key); }
    [[nodiscard]] std::size_t size() const { return keys_.size(); }

  private:
    std::size_t capacity_;
    std::unordered_set<Digest256> keys_;
    std::deque<Digest256> order_;
};

enum class HandshakeError { NetworkMismatch, Timeout, Banned };

std::string_view to_string(HandshakeError e);

struct HandshakeOutcome {
    std::optional<HandshakeError> error;
    std::string detail;
    [[nodiscard]] bool connected() const { return !error; }
};

/// Decides whether a received Hello establishes a connection.
HandshakeOutcome evaluate_hello(const NetMessage& hello, const std::string& network_id, const Digest256& genesis_id,
                                const PeerTable& peers);

}  // namespace chainfab
