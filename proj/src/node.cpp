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

#include "chainfab/node.hpp"

#include <algorithm>
#include <array>

namespace chainfab {

namespace {

constexpr std::size_t kMaxOrphans = 256;

UnixSeconds to_seconds(Millis ms) { return ms >= 0 ? ms / 1000 : -((-ms + 999) / 1000); }

}  // namespace

std::string_view to_string(NodeRole role) {
    static constexpr std::array<std::string_view, 4> names = {"provider", "customer", "validator", "observer"};
    return names.at(static_cast<std::size_t>(role));
}

std::optional<NodeRole> parse_node_role(std::string_view name) {
    for (auto r : {NodeRole::Provider, NodeRole::Customer, NodeRole::Validator, NodeRole::Observer}) {
        if (to_string(r) == name) return r;
    }
    return std::nullopt;
}

std::optional<ServiceOfferPayload> ProviderPolicy::quote(const Digest256& request_id, const ServiceRequestPayload& request,
                                                         UnixSeconds now) const {
    if (std::find(capabilities.begin(), capabilities.end(), request.process_tag) == capabilities.end()) return std::nullopt;
    Amount p = price();
    if (p <= 0 || p > request.max_price) return std::nullopt;
    UnixSeconds promised = now + lead_time;
    if (promised > request.due_date) return std::nullopt;
    return ServiceOfferPayload{request_id, p, promised};
}

void NodeOptions::validate() const {
    try {
        genesis.consensus.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("consensus: ") + e.what());
    }
    if (max_block_txs == 0) throw ConfigError("max_block_txs must be positive");
    if (mempool_capacity == 0) throw ConfigError("mempool capacity must be positive");
    if (role == NodeRole::Validator && genesis.consensus.mode == ConsensusMode::RoundRobinAuthority) {
        const auto& roster = genesis.consensus.authorities;
        if (std::find(roster.begin(), roster.end(), derive_address(key.public_key)) == roster.end()) {
            throw ConfigError("validator " + derive_address(key.public_key).to_string() + " is not in the authority roster");
        }
    }
    if (policy) {
        if (policy->base_cost < 0 || policy->margin < 0 || policy->lead_time < 0) {
            throw ConfigError("provider policy values must be non-negative");
        }
    }
}

Node::Node(NodeOptions options, Transport& transport, BlockJournal& journal)
    : options_((options.validate(), std::move(options))),
      transport_(transport),
      journal_(journal),
      address_(derive_address(options_.key.public_key)),
      store_(options_.genesis),
      tip_(store_.genesis_id()),
      mempool_(options_.mempool_capacity),
      peers_(options_.max_peers) {
    auto lines = journal_.load();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        Block block;
        try {
            block = Block::decode(lines[i]);
        } catch (const std::exception& e) {
            throw CorruptStore(i + 1, e.what());
        }
        auto r = store_.add_block(block);
        if (r.outcome != AddOutcome::Added) {
            std::string why = r.outcome == AddOutcome::UnknownParent ? "unknown parent"
                              : r.outcome == AddOutcome::Duplicate   ? "duplicate block"
                                                                     : "invalid block";
            if (!r.violations.empty()) why += ": " + std::string(to_string(r.violations.front().code));
            throw CorruptStore(i + 1, why);
        }
        for (const auto& tid : block.tx_ids()) tx_blocks_[tid].push_back(r.id);
    }
    tip_ = fork_choice(store_);
    pending_state_ = state();
}

void Node::emit(NodeEvent::Kind kind, const Digest256& id, std::string detail) {
    if (observer_) observer_(NodeEvent{kind, id, std::move(detail)});
}

void Node::send(const std::string& endpoint, const NetMessage& msg) { transport_.send(endpoint, msg.encode()); }

TipPayload Node::tip_payload() const { return {height(), tip_}; }

UnixSeconds Node::pending_block_time(Millis now) const { return next_block_time(tip().block.header, to_seconds(now)); }

void Node::penalize(const Address& peer, const std::string& why) {
    if (peers_.penalize(peer)) syncs_.erase(peer);
    emit(NodeEvent::Kind::PeerPenalized, {}, peer.to_string() + " " + why);
}

void Node::dial(const std::string& endpoint, Millis now) {
    if (endpoint.empty() || endpoint == options_.listen || endpoint == transport_.local_endpoint()) return;
    if (dialing_.contains(endpoint)) return;
    dialing_[endpoint] = now + options_.handshake_timeout_ms;
    HelloPayload hello{store_.genesis_id(), height(), tip_, std::string{kSoftwareVersion}, options_.listen};
    send(endpoint, NetMessage::hello(network_id(), address_, hello));
}

void Node::start(Millis now) {
    for (const auto& ep : options_.bootstrap) dial(ep, now);
    next_ping_ = now + options_.ping_interval_ms;
    next_dial_ = now + options_.ping_interval_ms;
}

void Node::poll(Millis now) {
    while (auto d = transport_.receive()) on_message(d->endpoint, d->bytes, now);
}

void Node::tick(Millis now) {
    for (auto it = dialing_.begin(); it != dialing_.end();) {
        if (it->second <= now) {
            emit(NodeEvent::Kind::HandshakeFailed, {}, "Timeout: " + it->first);
            it = dialing_.erase(it);
        } else {
            ++it;
        }
    }
    for (auto it = syncs_.begin(); it != syncs_.end();) {
        if (it->second.deadline <= now) {
            emit(NodeEvent::Kind::SyncFinished, {}, "Timeout");
            it = syncs_.erase(it);
        } else {
            ++it;
        }
    }
    if (now >= next_dial_) {
        for (const auto& ep : options_.bootstrap) {
            bool connected = std::any_of(peers_.peers().begin(), peers_.peers().end(),
                                         [&](const auto& p) { return p.second.endpoint == ep || p.second.listen == ep; });
            if (!connected) dial(ep, now);
        }
        next_dial_ = now + options_.ping_interval_ms;
    }
    if (now >= next_ping_) {
        auto ping = NetMessage::ping(network_id(), address_, tip_payload());
        for (const auto& [id, rec] : peers_.peers()) send(rec.endpoint, ping);
        next_ping_ = now + options_.ping_interval_ms;
    }
}

void Node::on_message(const std::string& endpoint, std::string_view bytes, Millis now) {
    auto verdict = verify_inbound(bytes, InboundContext{network_id(), store_.consensus()});
    auto peer = peers_.by_endpoint(endpoint);
    if (!verdict.accepted()) {
        if (*verdict.reject == InboundReject::NetworkMismatch) {
            dialing_.erase(endpoint);
            emit(NodeEvent::Kind::HandshakeFailed, {}, "NetworkMismatch: " + verdict.detail);
        }
        if (peer) {
            syncs_.erase(*peer);
            penalize(*peer, std::string(to_string(*verdict.reject)));
        }
        return;
    }
    const NetMessage& msg = *verdict.message;
    if (msg.kind == MsgKind::Hello) {
        handle_hello(endpoint, msg, now);
        return;
    }
    if (!peer || *peer != msg.sender) {
        // Talk to us only after a handshake.
        if (!peers_.is_banned(msg.sender)) dial(endpoint, now);
        return;
    }
    peers_.find(*peer)->last_seen = now;
    switch (msg.kind) {
        case MsgKind::PeerList:
            handle_peer_list(msg, now);
            break;
        case MsgKind::TxGossip:
            handle_tx(*peer, msg, now);
            break;
        case MsgKind::BlockGossip:
            handle_block(*peer, endpoint, msg, now);
            break;
        case MsgKind::GetBlocks:
            handle_get_blocks(endpoint, msg);
            break;
        case MsgKind::Blocks:
            handle_blocks(*peer, endpoint, msg, now);
            break;
        case MsgKind::Ping:
        case MsgKind::Pong:
            handle_tip(*peer, endpoint, msg, now);
            break;
        case MsgKind::Hello:
            break;
    }
}

void Node::handle_hello(const std::string& endpoint, const NetMessage& msg, Millis now) {
    bool we_dialed = dialing_.erase(endpoint) > 0;
    auto outcome = evaluate_hello(msg, network_id(), store_.genesis_id(), peers_);
    if (!outcome.connected()) {
        emit(NodeEvent::Kind::HandshakeFailed, {}, std::string(to_string(*outcome.error)) + ": " + outcome.detail);
        return;
    }
    if (msg.sender == address_) return;
    auto hello = msg.as_hello();
    PeerRecord rec{endpoint, now, kInitialPeerScore, hello.tip_height, hello.tip_id, hello.listen};
    auto added = peers_.upsert(msg.sender, rec);
    if (added == PeerTable::AddResult::Banned || added == PeerTable::AddResult::Full) return;
    // Answer every Hello we did not ask for, so a restarted peer that we
    // still list gets a reply.
    if (!we_dialed) {
        HelloPayload mine{store_.genesis_id(), height(), tip_, std::string{kSoftwareVersion}, options_.listen};
        send(endpoint, NetMessage::hello(network_id(), address_, mine));
    }
    if (added == PeerTable::AddResult::Added || !we_dialed) {
        std::vector<PeerInfo> known;
        for (const auto& [id, p] : peers_.peers()) {
            if (id != msg.sender && !p.listen.empty()) known.push_back({id, p.listen});
        }
        send(endpoint, NetMessage::peer_list(network_id(), address_, known));
    }
    if (!store_.contains(hello.tip_id)) begin_sync(msg.sender, endpoint, now);
}

void Node::handle_peer_list(const NetMessage& msg, Millis now) {
    for (const auto& info : msg.as_peer_list()) {
        if (peers_.size() >= peers_.capacity()) break;
        if (info.node_id == address_ || peers_.find(info.node_id) || peers_.is_banned(info.node_id)) continue;
        dial(info.endpoint, now);
    }
}

std::vector<Address> Node::gossip(const NetMessage& msg, const std::optional<Address>& origin) {
    std::vector<Address> forwarded;
    if (!seen_.insert(msg.dedup_key())) return forwarded;
    NetMessage out = msg;
    out.sender = address_;
    const std::string bytes = out.encode();
    for (const auto& [id, rec] : peers_.peers()) {
        if (origin && id == *origin) continue;
        if (transport_.send(rec.endpoint, bytes)) {
            forwarded.push_back(id);
        } else if (auto* p = peers_.find(id)) {
            // Unreachable is not misbehaviour; never ban for it.
            p->score = std::max(1, p->score - 1);
        }
    }
    return forwarded;
}

SubmitResult Node::submit_transaction(const Transaction& tx, Millis now) {
    SubmitResult r;
    r.tx_id = tx.id();
    auto reject = [&](std::string reason, std::string detail) {
        r.reason = std::move(reason);
        r.detail = std::move(detail);
        return r;
    };
    if (mempool_.contains(r.tx_id)) return reject("ReplayedTransaction", "already pending");
    if (tx.kind() == TxKind::Coinbase) return reject("BadCoinbase", "coinbase transactions are created by block producers");
    TxContext ctx{pending_block_time(now), std::nullopt};
    if (auto rej = validate_transaction(pending_state_, tx, ctx)) {
        return reject(std::string(to_string(rej->code)), rej->detail);
    }
    if (mempool_.full()) return reject("MempoolFull", "capacity " + std::to_string(mempool_.capacity()));
    apply_transaction_in_place(pending_state_, tx, ctx);
    mempool_.push_back(tx);
    r.accepted = true;
    emit(NodeEvent::Kind::TxAdmitted, r.tx_id);
    gossip(NetMessage::tx_gossip(network_id(), address_, tx), std::nullopt);
    return r;
}

void Node::handle_tx(const Address& origin, const NetMessage& msg, Millis now) {
    if (seen_.contains(msg.dedup_key())) return;
    auto tx = msg.as_tx();
    auto id = tx.id();
    if (mempool_.contains(id)) return;
    TxContext ctx{pending_block_time(now), std::nullopt};
    if (validate_transaction(pending_state_, tx, ctx)) return;
    if (mempool_.full()) return;
    apply_transaction_in_place(pending_state_, tx, ctx);
    mempool_.push_back(tx);
    emit(NodeEvent::Kind::TxAdmitted, id);
    gossip(msg, origin);
}

Node::Connect Node::connect_block(const Block& block, const std::optional<Address>& origin, Millis now) {
    (void)origin;
    auto id = block.id();
    if (store_.contains(id)) return Connect::Duplicate;
    const auto& parent = block.header.prev_hash;
    if (!store_.contains(parent)) {
        bool known = false;
        for (auto [it, end] = orphans_.equal_range(parent); it != end; ++it) known = known || it->second.id() == id;
        if (!known && orphans_.size() < kMaxOrphans) orphans_.emplace(parent, block);
        return Connect::Orphan;
    }
    auto r = store_.add_block(block);
    if (r.outcome != AddOutcome::Added) return Connect::Invalid;
    journal_.append(block);
    for (const auto& tid : block.tx_ids()) tx_blocks_[tid].push_back(id);
    emit(NodeEvent::Kind::BlockConnected, id);
    update_tip(now);
    admit_orphans(id, now);
    return Connect::Added;
}

void Node::admit_orphans(const Digest256& parent, Millis now) {
    std::vector<Block> ready;
    for (auto [it, end] = orphans_.equal_range(parent); it != end; ++it) ready.push_back(it->second);
    orphans_.erase(parent);
    for (const auto& b : ready) {
        if (connect_block(b, std::nullopt, now) == Connect::Added) seen_.insert(NetMessage::block_gossip(network_id(), address_, b).dedup_key());
    }
}

void Node::update_tip(Millis now) {
    auto best = fork_choice(store_);
    if (best == tip_) return;
    const ChainEntry* a = store_.find(tip_);
    const ChainEntry* b = store_.find(best);
    std::vector<const ChainEntry*> removed;
    std::vector<const ChainEntry*> added;
    auto parent = [&](const ChainEntry* e) { return store_.find(e->block.header.prev_hash); };
    while (a->height() > b->height()) {
        removed.push_back(a);
        a = parent(a);
    }
    while (b->height() > a->height()) {
        added.push_back(b);
        b = parent(b);
    }
    while (a->id != b->id) {
        removed.push_back(a);
        added.push_back(b);
        a = parent(a);
        b = parent(b);
    }
    std::reverse(removed.begin(), removed.end());
    std::reverse(added.begin(), added.end());
    tip_ = best;

    std::vector<Transaction> returning;
    for (const auto* e : removed) {
        for (const auto& tx : e->block.transactions) {
            if (tx.kind() != TxKind::Coinbase) returning.push_back(tx);
        }
    }
    if (!returning.empty()) mempool_.push_front(returning);
    refresh_pending(now);
    emit(NodeEvent::Kind::TipChanged, best);
    autobid(added, now);
}

void Node::refresh_pending(Millis now) { pending_state_ = mempool_.revalidate(state(), pending_block_time(now)); }

void Node::autobid(const std::vector<const ChainEntry*>& connected, Millis now) {
    if (options_.role != NodeRole::Provider || !options_.policy) return;
    for (const auto* entry : connected) {
        for (const auto& tx : entry->block.transactions) {
            const auto* req = tx.as<ServiceRequestPayload>();
            if (!req) continue;
            auto rid = tx.id();
            if (bid_on_.contains(rid)) continue;
            auto it = state().requests.find(rid);
            if (it == state().requests.end() || it->second.status != RequestStatus::Open) continue;
            bid_on_.insert(rid);
            bool offered = std::any_of(it->second.offers.begin(), it->second.offers.end(),
                                       [&](const auto& o) { return o.second.provider == address_; });
            if (offered) continue;
            auto offer = options_.policy->quote(rid, *req, to_seconds(now));
            if (!offer) continue;
            submit_transaction(make_signed(options_.key, *offer), now);
        }
    }
}

std::optional<Block> Node::try_produce(Millis now) {
    if (!options_.produce) return std::nullopt;
    const auto& cfg = store_.consensus();
    const ChainEntry& parent = tip();
    if (cfg.mode == ConsensusMode::RoundRobinAuthority) {
        if (options_.role != NodeRole::Validator || scheduled_authority(parent.height() + 1, cfg) != address_) {
            return std::nullopt;
        }
    }
    TxContext ctx{next_block_time(parent.block.header, to_seconds(now)), std::nullopt};
    LedgerState scratch = *parent.state;
    std::vector<Transaction> picked;
    for (const auto& tx : mempool_.entries()) {
        if (picked.size() >= options_.max_block_txs) break;
        if (!try_apply(scratch, tx, ctx)) picked.push_back(tx);
    }
    if (picked.empty() && !options_.produce_empty) return std::nullopt;

    Block block;
    for (;;) {
        try {
            block = assemble_block(parent.block.header, *parent.state, picked, address_, to_seconds(now), cfg);
            break;
        } catch (const InvalidTransactionError& e) {
            if (e.index == 0) throw;
            picked.erase(picked.begin() + static_cast<std::ptrdiff_t>(e.index - 1));
        }
    }
    if (picked.empty() && !options_.produce_empty) return std::nullopt;

    std::optional<Block> sealed;
    if (cfg.mode == ConsensusMode::ProofOfWork) {
        sealed = mine_pow(std::move(block), options_.pow_max_iterations);
        if (!sealed) return std::nullopt;
    } else {
        sealed = seal_authority(std::move(block), options_.key, cfg);
    }
    if (connect_block(*sealed, std::nullopt, now) != Connect::Added) return std::nullopt;
    gossip(NetMessage::block_gossip(network_id(), address_, *sealed), std::nullopt);
    return sealed;
}

void Node::handle_block(const Address& origin, const std::string& endpoint, const NetMessage& msg, Millis now) {
    if (seen_.contains(msg.dedup_key())) return;
    auto block = msg.as_block();
    switch (connect_block(block, origin, now)) {
        case Connect::Added:
            gossip(msg, origin);
            break;
        case Connect::Duplicate:
            seen_.insert(msg.dedup_key());
            break;
        case Connect::Orphan:
            begin_sync(origin, endpoint, now);
            break;
        case Connect::Invalid:
            penalize(origin, "invalid block");
            break;
    }
}

void Node::begin_sync(const Address& peer, const std::string& endpoint, Millis now) {
    if (syncs_.contains(peer)) return;
    std::uint64_t h = height();
    std::uint64_t depth = std::max<std::uint64_t>(1, store_.consensus().finality_depth);
    SyncSession s;
    s.endpoint = endpoint;
    s.from = h + 1 > depth ? h + 1 - depth : 1;
    s.span = h + 1 - s.from;
    if (s.span == 0) s.span = 1;
    auto& session = syncs_[peer] = s;
    request_blocks(peer, session, now);
}

void Node::request_blocks(const Address& peer, SyncSession& session, Millis now) {
    (void)peer;
    session.deadline = now + options_.sync_timeout_ms;
    send(session.endpoint, NetMessage::get_blocks(network_id(), address_, {session.from, kMaxBlocksPerBatch}));
}

void Node::handle_get_blocks(const std::string& endpoint, const NetMessage& msg) {
    auto req = msg.as_get_blocks();
    auto chain = main_chain();
    std::uint64_t from = std::max<std::uint64_t>(1, req.from_height);
    std::uint64_t limit = std::min<std::uint64_t>(req.limit, kMaxBlocksPerBatch);
    std::vector<Block> out;
    for (std::uint64_t h = from; h < chain.size() && out.size() < limit; ++h) out.push_back(chain[h]->block);
    send(endpoint, NetMessage::blocks(network_id(), address_, out));
}

void Node::handle_blocks(const Address& origin, const std::string& endpoint, const NetMessage& msg, Millis now) {
    (void)endpoint;
    auto blocks = msg.as_blocks();
    auto it = syncs_.find(origin);
    auto finish = [&](const std::string& why) {
        if (it != syncs_.end()) {
            syncs_.erase(it);
            it = syncs_.end();
        }
        emit(NodeEvent::Kind::SyncFinished, {}, why);
    };
    auto back_off = [&] {
        auto& s = it->second;
        s.span = std::max<std::uint64_t>(1, s.span * 2);
        s.from = s.from > s.span ? s.from - s.span : 1;
        request_blocks(origin, s, now);
    };

    const auto* peer_rec = peers_.find(origin);
    bool peer_tip_unknown = peer_rec && !store_.contains(peer_rec->tip_id);
    if (blocks.empty()) {
        if (it != syncs_.end() && it->second.from > 1 && peer_tip_unknown) {
            back_off();
            return;
        }
        finish("done");
        return;
    }
    if (!store_.contains(blocks.front().header.prev_hash)) {
        if (it != syncs_.end() && it->second.from > 1) {
            back_off();
            return;
        }
        finish("disconnected batch");
        return;
    }
    std::uint64_t adopted = 0;
    for (const auto& b : blocks) {
        auto c = connect_block(b, origin, now);
        if (c == Connect::Added) {
            ++adopted;
        } else if (c == Connect::Invalid) {
            sync_adopted_ += adopted;
            finish("InvalidBlockFromPeer");
            penalize(origin, "InvalidBlockFromPeer");
            return;
        } else if (c == Connect::Orphan) {
            break;
        }
    }
    sync_adopted_ += adopted;
    if (it != syncs_.end() && blocks.size() == kMaxBlocksPerBatch) {
        it->second.from = blocks.back().header.height + 1;
        request_blocks(origin, it->second, now);
        return;
    }
    finish("done");
}

void Node::handle_tip(const Address& origin, const std::string& endpoint, const NetMessage& msg, Millis now) {
    auto tip = msg.as_tip();
    if (auto* rec = peers_.find(origin)) {
        rec->tip_height = tip.tip_height;
        rec->tip_id = tip.tip_id;
    }
    if (msg.kind == MsgKind::Ping) send(endpoint, NetMessage::pong(network_id(), address_, tip_payload()));
    if (!store_.contains(tip.tip_id)) begin_sync(origin, endpoint, now);
}

std::optional<TxLocation> Node::find_tx(const Digest256& id) const {
    if (auto it = tx_blocks_.find(id); it != tx_blocks_.end()) {
        for (const auto& bid : it->second) {
            const auto* entry = store_.find(bid);
            const auto* on_main = store_.ancestor_at(tip_, entry->height());
            if (!on_main || on_main->id != bid) continue;
            for (const auto& tx : entry->block.transactions) {
                if (tx.id() == id) return TxLocation{TxLocation::Where::Confirmed, bid, entry->height(), height() - entry->height() + 1, tx};
            }
        }
    }
    if (const auto* tx = mempool_.find(id)) return TxLocation{TxLocation::Where::Pending, {}, 0, 0, *tx};
    return std::nullopt;
}

}  // namespace chainfab
