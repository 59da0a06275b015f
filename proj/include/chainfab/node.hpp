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

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chainfab/chain_store.hpp"
#include "chainfab/journal.hpp"
#include "chainfab/mempool.hpp"
#include "chainfab/net_message.hpp"
#include "chainfab/peers.hpp"
#include "chainfab/transport.hpp"

namespace chainfab {

enum class NodeRole { Provider, Customer, Validator, Observer };

std::string_view to_string(NodeRole role);
std::optional<NodeRole> parse_node_role(std::string_view name);

struct ProviderPolicy {
    std::vector<std::string> capabilities;
    Amount base_cost = 0;
    std::int64_t margin = 0;  // per mille
    UnixSeconds lead_time = 0;

    [[nodiscard]] Amount price() const { return base_cost * (1000 + margin) / 1000; }
    // The offer this policy makes for request at time now, if any.
    [[nodiscard]] std::optional<ServiceOfferPayload> quote(const Digest256& request_id, const ServiceRequestPayload& request,
                                                           UnixSeconds now) const;
};

class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct NodeOptions {
    NodeRole role = NodeRole::Observer;
    KeyPair key;
    GenesisConfig genesis;
    std::string listen;  // advertised in Hello; empty when not dialable
    std::vector<std::string> bootstrap;
    std::optional<ProviderPolicy> policy;

    bool produce = true;
    bool produce_empty = false;
    std::size_t max_block_txs = 100;
    std::uint64_t pow_max_iterations = 1U << 22;
    std::size_t mempool_capacity = kDefaultMempoolCapacity;
    std::size_t max_peers = kDefaultMaxPeers;

    Millis ping_interval_ms = 5'000;
    Millis handshake_timeout_ms = 5'000;
    Millis sync_timeout_ms = 10'000;

    // Throws ConfigError.
    void validate() const;
};

struct SubmitResult {
    bool accepted = false;
    Digest256 tx_id;
    std::string reason;  // TxError name or "MempoolFull"
    std::string detail;
};

struct TxLocation {
    enum class Where { Pending, Confirmed } where = Where::Pending;
    Digest256 block_id;
    std::uint64_t height = 0;
    std::uint64_t confirmations = 0;
    Transaction tx;
};

struct NodeEvent {
    enum class Kind { TxAdmitted, BlockConnected, TipChanged, PeerPenalized, HandshakeFailed, SyncFinished };
    Kind kind;
    Digest256 id;
    std::string detail;
};

/// One full node. Single-threaded: every input arrives through on_message,
/// tick, try_produce or submit_transaction, each stamped with the caller's
/// clock in milliseconds since the Unix epoch.
class Node {
  public:
    // Replays the journal; throws CorruptStore if any record fails validation.
    Node(NodeOptions options, Transport& transport, BlockJournal& journal);

    void start(Millis now);
    void on_message(const std::string& endpoint, std::string_view bytes, Millis now);
    // Drains the transport inbox.
    void poll(Millis now);
    void tick(Millis now);
    // Returns the produced block when one was appended.
    std::optional<Block> try_produce(Millis now);
    SubmitResult submit_transaction(const Transaction& tx, Millis now);

    // Sends msg to every peer except origin; empty when msg was seen before.
    std::vector<Address> gossip(const NetMessage& msg, const std::optional<Address>& origin);

    void set_observer(std::function<void(const NodeEvent&)> fn) { observer_ = std::move(fn); }

    [[nodiscard]] const NodeOptions& options() const { return options_; }
    [[nodiscard]] const Address& address() const { return address_; }
    [[nodiscard]] const std::string& network_id() const { return options_.genesis.network_id; }
    [[nodiscard]] const ChainStore& store() const { return store_; }
    [[nodiscard]] const ChainEntry& tip() const { return *store_.find(tip_); }
    [[nodiscard]] const Digest256& tip_id() const { return tip_; }
    [[nodiscard]] std::uint64_t height() const { return tip().height(); }
    [[nodiscard]] const LedgerState& state() const { return *tip().state; }
    [[nodiscard]] const Mempool& mempool() const { return mempool_; }
    [[nodiscard]] const PeerTable& peers() const { return peers_; }
    [[nodiscard]] std::vector<const ChainEntry*> main_chain() const { return store_.branch(tip_); }
    [[nodiscard]] std::optional<TxLocation> find_tx(const Digest256& id) const;
    [[nodiscard]] bool syncing() const { return !syncs_.empty(); }
    [[nodiscard]] std::uint64_t blocks_adopted_by_sync() const { return sync_adopted_; }
    [[nodiscard]] const std::set<Digest256>& bids_made() const { return bid_on_; }

  private:
    struct SyncSession {
        std::string endpoint;
        std::uint64_t from = 1;
        std::uint64_t span = 0;
        Millis deadline = 0;
    };

    enum class Connect { Added, Duplicate, Orphan, Invalid };

    void send(const std::string& endpoint, const NetMessage& msg);
    void emit(NodeEvent::Kind kind, const Digest256& id, std::string detail = {});
    void penalize(const Address& peer, const std::string& why);
    void dial(const std::string& endpoint, Millis now);

    void handle_hello(const std::string& endpoint, const NetMessage& msg, Millis now);
    void handle_peer_list(const NetMessage& msg, Millis now);
    void handle_tx(const Address& origin, const NetMessage& msg, Millis now);
    void handle_block(const Address& origin, const std::string& endpoint, const NetMessage& msg, Millis now);
    void handle_get_blocks(const std::string& endpoint, const NetMessage& msg);
    void handle_blocks(const Address& origin, const std::string& endpoint, const NetMessage& msg, Millis now);
    void handle_tip(const Address& origin, const std::string& endpoint, const NetMessage& msg, Millis now);

    void begin_sync(const Address& peer, const std::string& endpoint, Millis now);
    void request_blocks(const Address& peer, SyncSession& session, Millis now);

    Connect connect_block(const Block& block, const std::optional<Address>& origin, Millis now);
    void update_tip(Millis now);
    void admit_orphans(const Digest256& parent, Millis now);
    void autobid(const std::vector<const ChainEntry*>& connected, Millis now);
    void refresh_pending(Millis now);
    [[nodiscard]] UnixSeconds pending_block_time(Millis now) const;
    [[nodiscard]] TipPayload tip_payload() const;

    NodeOptions options_;
    Transport& transport_;
    BlockJournal& journal_;
    Address address_;
    ChainStore store_;
    Digest256 tip_;
    Mempool mempool_;
    LedgerState pending_state_;
    PeerTable peers_;
    DedupCache seen_;
    std::map<std::string, Millis> dialing_;  // endpoint -> handshake deadline
    std::map<Address, SyncSession> syncs_;
    std::multimap<Digest256, Block> orphans_;
    std::map<Digest256, std::vector<Digest256>> tx_blocks_;  // tx id -> blocks containing it
    std::set<Digest256> bid_on_;
    Millis next_ping_ = 0;
    Millis next_dial_ = 0;
    std::uint64_t sync_adopted_ = 0;
    std::function<void(const NodeEvent&)> observer_;
};

}  // namespace chainfab
