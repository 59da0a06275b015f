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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "chainfab/node.hpp"
#include "chainfab/sim_network.hpp"
#include "test_support.hpp"

using namespace chainfab;
using namespace chainfab::testing;

namespace {

constexpr Millis kBase = kGenesisTime * 1000;

// Small cluster of nodes on the simulated network, driven step by step.
struct Cluster {
    SimNetwork net;
    GenesisConfig genesis;
    std::map<std::string, std::unique_ptr<MemoryJournal>> journals;
    std::map<std::string, std::unique_ptr<Node>> nodes;

    explicit Cluster(GenesisConfig g, SimNetConfig cfg = {1, 5, 20, 0.0}) : net(cfg), genesis(std::move(g)) {}

    Millis now() const { return kBase + net.now(); }

    Node& add(const std::string& name, std::vector<std::string> bootstrap = {},
              const std::function<void(NodeOptions&)>& tweak = {}) {
        NodeOptions o;
        o.role = NodeRole::Observer;
        o.key = key_for(name);
        o.genesis = genesis;
        o.listen = name;
        o.bootstrap = std::move(bootstrap);
        if (tweak) tweak(o);
        auto& transport = net.add_endpoint(name);
        journals[name] = std::make_unique<MemoryJournal>();
        auto& node = *(nodes[name] = std::make_unique<Node>(o, transport, *journals[name]));
        net.on_delivery(name, [this, name] { nodes.at(name)->poll(now()); });
        return node;
    }

    Node& operator[](const std::string& name) { return *nodes.at(name); }

    void start() {
        for (auto& [_, n] : nodes) n->start(now());
    }

    void run_for(Millis ms, Millis step = 250) {
        Millis end = net.now() + ms;
        while (net.now() < end) {
            net.run_until(std::min(end, net.now() + step));
            for (auto& [_, n] : nodes) n->tick(now());
        }
        net.run_until_quiescent();
    }
};

GenesisConfig funded_genesis(int bits = 4) { return pow_genesis(bits, {{"customer", 100}, {"rich", 1000}}); }

Transaction request_tx(const std::string& spec = "ellipse pocket in the middle of a cube", Amount max_price = 100) {
    auto p = case_study_request(kGenesisTime + 30 * kDay, max_price);
    p.product_spec = spec;
    return make_signed(key_for("customer"), p);
}

}  // namespace

TEST(NodeOptions, ValidatorMustBeOnRoster) {
    NodeOptions o;
    o.role = NodeRole::Validator;
    o.key = key_for("outsider");
    o.genesis = funded_genesis();
    o.genesis.consensus.mode = ConsensusMode::RoundRobinAuthority;
    o.genesis.consensus.authorities = {addr_of("v1")};
    EXPECT_THROW(o.validate(), ConfigError);
    o.key = key_for("v1");
    EXPECT_NO_THROW(o.validate());
}

TEST(ProviderPolicy, QuoteArithmetic) {
    auto req = case_study_request();
    auto rid = hash_bytes("r");
    ProviderPolicy p{{"cnc-milling"}, 50, 200, kDay};
    auto q = p.quote(rid, req, kGenesisTime);
    ASSERT_TRUE(q.has_value());
    EXPECT_EQ(q->quoted_price, 60);
    EXPECT_EQ(q->promised_due_date, kGenesisTime + kDay);
    EXPECT_EQ(q->request_id, rid);

    // Integer division truncates.
    EXPECT_EQ((ProviderPolicy{{}, 33, 333, 0}.price()), 43);

    ProviderPolicy pricey{{"cnc-milling"}, 100, 200, kDay};
    EXPECT_FALSE(pricey.quote(rid, req, kGenesisTime).has_value());

    auto molding = req;
    molding.process_tag = "injection-molding";
    EXPECT_FALSE(p.quote(rid, molding, kGenesisTime).has_value());

    ProviderPolicy slow{{"cnc-milling"}, 50, 200, 8 * kDay};
    EXPECT_FALSE(slow.quote(rid, req, kGenesisTime).has_value());
}

TEST(Node, SubmitAcceptsAndGossips) {
    Cluster c(funded_genesis());
    c.add("a");
    c.add("b", {"a"});
    c.add("c", {"a"});
    c.start();
    c.run_for(2000);
    ASSERT_EQ(c["a"].peers().size(), 2U);

    auto tx = request_tx();
    auto r = c["b"].submit_transaction(tx, c.now());
    ASSERT_TRUE(r.accepted) << r.reason << " " << r.detail;
    EXPECT_EQ(r.tx_id, tx.id());
    c.run_for(1000);
    for (auto n : {"a", "b", "c"}) EXPECT_TRUE(c[n].mempool().contains(tx.id())) << n;

    auto dup = c["b"].submit_transaction(tx, c.now());
    EXPECT_FALSE(dup.accepted);
    EXPECT_EQ(dup.reason, "ReplayedTransaction");
}

TEST(Node, MempoolFull) {
    Cluster c(funded_genesis());
    c.add("a", {}, [](NodeOptions& o) { o.mempool_capacity = 2; });
    EXPECT_TRUE(c["a"].submit_transaction(request_tx("one"), c.now()).accepted);
    EXPECT_TRUE(c["a"].submit_transaction(request_tx("two"), c.now()).accepted);
    auto r = c["a"].submit_transaction(request_tx("three"), c.now());
    EXPECT_FALSE(r.accepted);
    EXPECT_EQ(r.reason, "MempoolFull");
}

TEST(Node, RejectionsMirrorValidation) {
    Cluster c(funded_genesis());
    auto& a = c.add("a");
    auto pay = make_signed(key_for("customer"), TransferPayload{addr_of("x"), 500, ""});
    auto r = a.submit_transaction(pay, c.now());
    EXPECT_EQ(r.reason, "InsufficientFunds");
    EXPECT_EQ(a.submit_transaction(make_coinbase(1, addr_of("x"), 50), c.now()).reason, "BadCoinbase");
    // Two transfers that only fit one at a time.
    EXPECT_TRUE(a.submit_transaction(make_signed(key_for("customer"), TransferPayload{addr_of("x"), 70, ""}), c.now()).accepted);
    EXPECT_EQ(a.submit_transaction(make_signed(key_for("customer"), TransferPayload{addr_of("y"), 70, ""}), c.now()).reason,
              "InsufficientFunds");
}

TEST(Node, ProducesBlockFromMempool) {
    Cluster c(funded_genesis());
    auto& a = c.add("a");
    EXPECT_FALSE(a.try_produce(c.now()).has_value());  // nothing pending, produce_empty off
    for (auto s : {"one", "two", "three"}) ASSERT_TRUE(a.submit_transaction(request_tx(s), c.now()).accepted);
    auto block = a.try_produce(c.now() + 1000);
    ASSERT_TRUE(block.has_value());
    EXPECT_EQ(block->transactions.size(), 4U);
    EXPECT_EQ(block->transactions.front().kind(), TxKind::Coinbase);
    EXPECT_EQ(a.height(), 1U);
    EXPECT_EQ(a.mempool().size(), 0U);
    EXPECT_EQ(a.state().requests.size(), 3U);
    auto loc = a.find_tx(block->transactions[1].id());
    ASSERT_TRUE(loc.has_value());
    EXPECT_EQ(loc->where, TxLocation::Where::Confirmed);
    EXPECT_EQ(loc->height, 1U);
}

TEST(Node, ProduceRespectsBlockCapacity) {
    Cluster c(funded_genesis());
    auto& a = c.add("a", {}, [](NodeOptions& o) { o.max_block_txs = 2; });
    for (auto s : {"one", "two", "three"}) ASSERT_TRUE(a.submit_transaction(request_tx(s), c.now()).accepted);
    auto block = a.try_produce(c.now() + 1000);
    ASSERT_TRUE(block.has_value());
    EXPECT_EQ(block->transactions.size(), 3U);
    EXPECT_EQ(a.mempool().size(), 1U);
    // Arrival order.
    EXPECT_EQ(block->transactions[1].as<ServiceRequestPayload>()->product_spec, "one");
    EXPECT_EQ(a.mempool().entries()[0].as<ServiceRequestPayload>()->product_spec, "three");
}

TEST(Node, ProduceEmptyWhenConfigured) {
    Cluster c(funded_genesis());
    auto& a = c.add("a", {}, [](NodeOptions& o) { o.produce_empty = true; });
    auto block = a.try_produce(c.now());
    ASSERT_TRUE(block.has_value());
    EXPECT_EQ(block->transactions.size(), 1U);
    EXPECT_EQ(a.state().balance(addr_of("a")), 50);
}

TEST(Node, AuthorityOnlyScheduledValidatorProduces) {
    auto g = funded_genesis();
    g.consensus.mode = ConsensusMode::RoundRobinAuthority;
    g.consensus.authorities = {addr_of("v0"), addr_of("v1")};
    Cluster c(g);
    auto validator = [](NodeOptions& o) {
        o.role = NodeRole::Validator;
        o.produce_empty = true;
    };
    c.add("v0", {}, validator);
    c.add("v1", {"v0"}, validator);
    c.start();
    c.run_for(1000);
    // Height 1 is scheduled for v1 (1 mod 2).
    EXPECT_FALSE(c["v0"].try_produce(c.now()).has_value());
    ASSERT_TRUE(c["v1"].try_produce(c.now()).has_value());
    c.run_for(500);
    EXPECT_EQ(c["v0"].height(), 1U);
    EXPECT_FALSE(c["v1"].try_produce(c.now()).has_value());
    ASSERT_TRUE(c["v0"].try_produce(c.now()).has_value());
    c.run_for(500);
    EXPECT_EQ(c["v1"].tip_id(), c["v0"].tip_id());
}

TEST(Node, ReorgReturnsTransactionToMempool) {
    Cluster c(funded_genesis());
    c.add("a", {}, [](NodeOptions& o) { o.produce_empty = true; });
    c.add("b", {"a"}, [](NodeOptions& o) { o.produce_empty = true; });
    c.start();
    c.run_for(1000);
    c.net.partition({{"a"}, {"b"}});

    auto tx = request_tx();
    ASSERT_TRUE(c["a"].submit_transaction(tx, c.now()).accepted);
    ASSERT_TRUE(c["a"].try_produce(c.now()).has_value());
    ASSERT_FALSE(c["a"].mempool().contains(tx.id()));
    ASSERT_TRUE(c["a"].state().requests.contains(tx.id()));

    ASSERT_TRUE(c["b"].try_produce(c.now()).has_value());
    ASSERT_TRUE(c["b"].try_produce(c.now() + 1000).has_value());
    c.run_for(1000);
    ASSERT_EQ(c["a"].height(), 1U);

    c.net.heal();
    c.run_for(12'000);  // pings reveal the heavier branch
    EXPECT_EQ(c["a"].tip_id(), c["b"].tip_id());
    EXPECT_EQ(c["a"].height(), 2U);
    EXPECT_TRUE(c["a"].mempool().contains(tx.id()));
    EXPECT_FALSE(c["a"].state().requests.contains(tx.id()));
    auto loc = c["a"].find_tx(tx.id());
    ASSERT_TRUE(loc.has_value());
    EXPECT_EQ(loc->where, TxLocation::Where::Pending);
}

namespace {

struct AutobidCase {
    ProviderPolicy policy;
    std::string tag;
    std::optional<Amount> expected;
};

std::optional<Amount> run_autobid(const AutobidCase& tc) {
    Cluster c(funded_genesis());
    auto& p = c.add("provider", {}, [&](NodeOptions& o) {
        o.role = NodeRole::Provider;
        o.policy = tc.policy;
    });
    auto req = case_study_request(kGenesisTime + 30 * kDay);
    req.process_tag = tc.tag;
    auto tx = make_signed(key_for("customer"), req);
    EXPECT_TRUE(p.submit_transaction(tx, c.now()).accepted);
    EXPECT_TRUE(p.try_produce(c.now()).has_value());
    EXPECT_LE(p.mempool().size(), 1U);
    if (p.mempool().size() == 0) return std::nullopt;
    const auto& offer = p.mempool().entries()[0];
    EXPECT_EQ(offer.sender(), addr_of("provider"));
    EXPECT_EQ(offer.as<ServiceOfferPayload>()->request_id, tx.id());
    return offer.as<ServiceOfferPayload>()->quoted_price;
}

}  // namespace

TEST(Node, AutobidMatchingRequest) {
    EXPECT_EQ(run_autobid({{{"cnc-milling"}, 50, 200, kDay}, "cnc-milling", 60}), std::optional<Amount>(60));
}

TEST(Node, AutobidSkipsUnaffordable) {
    EXPECT_EQ(run_autobid({{{"cnc-milling"}, 100, 200, kDay}, "cnc-milling", std::nullopt}), std::nullopt);
}

TEST(Node, AutobidSkipsOtherProcess) {
    EXPECT_EQ(run_autobid({{{"cnc-milling"}, 50, 200, kDay}, "injection-molding", std::nullopt}), std::nullopt);
}

TEST(Node, AutobidOfferConfirmsNextBlock) {
    Cluster c(funded_genesis());
    auto& p = c.add("provider", {}, [](NodeOptions& o) {
        o.role = NodeRole::Provider;
        o.policy = ProviderPolicy{{"cnc-milling"}, 50, 200, kDay};
    });
    auto tx = make_signed(key_for("customer"), case_study_request());
    ASSERT_TRUE(p.submit_transaction(tx, c.now()).accepted);
    ASSERT_TRUE(p.try_produce(c.now()).has_value());
    ASSERT_TRUE(p.try_produce(c.now() + 1000).has_value());
    const auto& rec = p.state().requests.at(tx.id());
    ASSERT_EQ(rec.offers.size(), 1U);
    EXPECT_EQ(rec.offers.begin()->second.offer.quoted_price, 60);
    // No second bid on the same request.
    EXPECT_FALSE(p.try_produce(c.now() + 2000).has_value());
}

TEST(Node, GossipForwardsToAllButOrigin) {
    Cluster c(funded_genesis());
    c.add("hub", {"p1", "p2", "p3", "p4"});
    for (auto n : {"p1", "p2", "p3", "p4"}) c.add(n);
    c.start();
    c.run_for(1000);
    ASSERT_EQ(c["hub"].peers().size(), 4U);

    auto msg = NetMessage::tx_gossip(c.genesis.network_id, addr_of("p2"), request_tx());
    auto first = c["hub"].gossip(msg, addr_of("p2"));
    std::vector<Address> expected = {addr_of("p1"), addr_of("p3"), addr_of("p4")};
    std::sort(first.begin(), first.end());
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(first, expected);
    EXPECT_TRUE(c["hub"].gossip(msg, addr_of("p2")).empty());
}

TEST(Node, FiveNodeGossipReachesEveryone) {
    Cluster c(funded_genesis());
    std::vector<std::string> names = {"n0", "n1", "n2", "n3", "n4"};
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::vector<std::string> boot(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(i));
        c.add(names[i], boot);
    }
    c.start();
    c.run_for(2000);
    for (const auto& n : names) EXPECT_EQ(c[n].peers().size(), 4U) << n;
    auto tx = request_tx();
    ASSERT_TRUE(c["n3"].submit_transaction(tx, c.now()).accepted);
    c.net.run_until_quiescent();
    for (const auto& n : names) EXPECT_TRUE(c[n].mempool().contains(tx.id())) << n;

    // Flood bound: each node forwards a given message at most once per peer.
    std::size_t sends = 0;
    for (const auto& e : c.net.trace()) sends += e.kind == TraceEvent::Kind::Send ? 1 : 0;
    EXPECT_GT(sends, 0U);
}

TEST(Node, HandshakeTimeoutAndMismatch) {
    Cluster c(funded_genesis());
    std::vector<std::string> failures;
    auto& a = c.add("a", {"ghost"});
    a.set_observer([&](const NodeEvent& e) {
        if (e.kind == NodeEvent::Kind::HandshakeFailed) failures.push_back(e.detail);
    });
    c.start();
    c.run_for(6000);
    ASSERT_FALSE(failures.empty());
    EXPECT_EQ(failures.front().rfind("Timeout", 0), 0U);

    // A node from another consortium.
    auto other = funded_genesis();
    other.network_id = "b";
    NodeOptions o;
    o.key = key_for("stranger");
    o.genesis = other;
    o.listen = "stranger";
    o.bootstrap = {"a"};
    MemoryJournal j;
    Node stranger(o, c.net.add_endpoint("stranger"), j);
    c.net.on_delivery("stranger", [&] { stranger.poll(c.now()); });
    failures.clear();
    stranger.start(c.now());
    c.run_for(500);
    ASSERT_FALSE(failures.empty());
    EXPECT_EQ(failures.front().rfind("NetworkMismatch", 0), 0U);
    EXPECT_EQ(a.peers().size(), 0U);
}

TEST(Node, SyncFreshNodeAdoptsChain) {
    Cluster c(funded_genesis());
    auto& a = c.add("a", {}, [](NodeOptions& o) { o.produce_empty = true; });
    for (int i = 0; i < 10; ++i) ASSERT_TRUE(a.try_produce(c.now() + i * 1000).has_value());
    auto& b = c.add("b", {"a"});
    c.start();
    c.run_for(2000);
    EXPECT_EQ(b.blocks_adopted_by_sync(), 10U);
    EXPECT_EQ(b.tip_id(), a.tip_id());
    EXPECT_EQ(b.state().state_hash(), a.state().state_hash());

    // Already in sync: pings keep flowing but nothing new is adopted.
    c.run_for(20'000);
    EXPECT_EQ(b.blocks_adopted_by_sync(), 10U);
}

TEST(Node, SyncPagesThroughLongChains) {
    Cluster c(pow_genesis(1, {{"customer", 100}}));
    auto& a = c.add("a", {}, [](NodeOptions& o) { o.produce_empty = true; });
    for (int i = 0; i < 250; ++i) ASSERT_TRUE(a.try_produce(c.now() + i * 1000).has_value());
    auto& b = c.add("b", {"a"});
    c.start();
    c.run_for(3000);
    EXPECT_EQ(b.height(), 250U);
    EXPECT_EQ(b.tip_id(), a.tip_id());
}

namespace {

// Peer that speaks just enough of the protocol to serve a fixed chain.
struct ScriptedPeer {
    SimTransport& transport;
    std::string network_id;
    Digest256 genesis_id;
    std::vector<Block> chain;  // heights 1..n
    Address id = addr_of("scripted");

    void on_delivery() {
        while (auto d = transport.receive()) {
            auto msg = NetMessage::decode(d->bytes);
            const Block& top = chain.back();
            if (msg.kind == MsgKind::Hello) {
                transport.send(d->endpoint,
                               NetMessage::hello(network_id, id, {genesis_id, top.header.height, top.id(), "x", ""}).encode());
            } else if (msg.kind == MsgKind::GetBlocks) {
                auto req = msg.as_get_blocks();
                std::vector<Block> out;
                for (auto h = req.from_height; h <= chain.size() && out.size() < req.limit; ++h) out.push_back(chain[h - 1]);
                transport.send(d->endpoint, NetMessage::blocks(network_id, id, out).encode());
            }
        }
    }
};

}  // namespace

TEST(Node, SyncStopsAtCorruptBlockAndPenalizes) {
    auto g = funded_genesis(4);
    ChainStore builder(g);
    std::vector<Block> chain;
    for (int i = 0; i < 10; ++i) {
        auto tip = fork_choice(builder);
        std::vector<Transaction> txs;
        Block b;
        if (i == 5) {
            // Well-formed, properly mined, but spends money the sender lacks.
            b = assemble_block(builder.find(tip)->block.header, *builder.find(tip)->state, {}, addr_of("m"),
                               kGenesisTime + i * 10, g.consensus);
            b.transactions.push_back(make_signed(key_for("customer"), TransferPayload{addr_of("m"), 5000, ""}));
            b.header.merkle_root = merkle_root(b.tx_ids());
            b = *mine_pow(b, 1'000'000);
            chain.push_back(b);
            break;
        }
        b = mine_child(builder, tip, txs, addr_of("m"), kGenesisTime + i * 10);
        ASSERT_EQ(builder.add_block(b).outcome, AddOutcome::Added);
        chain.push_back(b);
    }
    ASSERT_EQ(chain.size(), 6U);

    Cluster c(g);
    ScriptedPeer peer{c.net.add_endpoint("scripted"), g.network_id, genesis_block(g).id(), chain};
    c.net.on_delivery("scripted", [&] { peer.on_delivery(); });
    auto& b = c.add("b", {"scripted"});
    std::vector<std::string> penalties;
    b.set_observer([&](const NodeEvent& e) {
        if (e.kind == NodeEvent::Kind::PeerPenalized) penalties.push_back(e.detail);
    });
    c.start();
    c.run_for(2000);
    EXPECT_EQ(b.height(), 5U);
    EXPECT_EQ(b.blocks_adopted_by_sync(), 5U);
    ASSERT_FALSE(penalties.empty());
    ASSERT_NE(b.peers().find(peer.id), nullptr);
    EXPECT_EQ(b.peers().find(peer.id)->score, kInitialPeerScore - kInvalidMessagePenalty);
}

TEST(Node, RepeatedInvalidMessagesGetPeerBanned) {
    auto g = funded_genesis(4);
    Cluster c(g);
    auto& target = c.add("t");
    auto& raw = c.net.add_endpoint("evil");
    auto evil = addr_of("evil");
    c.start();
    raw.send("t", NetMessage::hello(g.network_id, evil, {target.store().genesis_id(), 0, target.store().genesis_id(), "x", ""}).encode());
    c.net.run_until_quiescent();
    ASSERT_NE(target.peers().find(evil), nullptr);
    auto forged = request_tx();
    std::get<ServiceRequestPayload>(forged.payload).max_price = 1;
    for (int i = 0; i < 10; ++i) {
        std::get<ServiceRequestPayload>(forged.payload).product_spec = "x" + std::to_string(i);
        raw.send("t", NetMessage::tx_gossip(g.network_id, evil, forged).encode());
    }
    c.net.run_until_quiescent();
    EXPECT_TRUE(target.peers().is_banned(evil));
    EXPECT_EQ(target.peers().find(evil), nullptr);
    EXPECT_EQ(target.mempool().size(), 0U);
}

class NodePersistence : public ::testing::Test {
  protected:
    void SetUp() override {
        dir = std::filesystem::temp_directory_path() /
              ("chainfab-node-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
               ::testing::UnitTest::GetInstance()->current_test_info()->name());
        std::filesystem::remove_all(dir);
    }
    void TearDown() override { std::filesystem::remove_all(dir); }

    NodeOptions options() {
        NodeOptions o;
        o.key = key_for("a");
        o.genesis = funded_genesis();
        o.produce_empty = true;
        return o;
    }

    std::pair<Digest256, Digest256> run_20_blocks() {
        SimNetwork net({1});
        FileJournal journal(dir);
        Node a(options(), net.add_endpoint("a"), journal);
        a.submit_transaction(request_tx(), kBase);
        a.submit_transaction(make_signed(key_for("customer"), TransferPayload{addr_of("x"), 10, "hi"}), kBase);
        for (int i = 0; i < 20; ++i) EXPECT_TRUE(a.try_produce(kBase + i * 1000).has_value());
        EXPECT_EQ(a.height(), 20U);
        return {a.tip_id(), a.state().state_hash()};
    }

    std::filesystem::path dir;
};

TEST_F(NodePersistence, RestartRestoresTipAndState) {
    auto [tip, state] = run_20_blocks();
    SimNetwork net({1});
    FileJournal journal(dir);
    Node again(options(), net.add_endpoint("a"), journal);
    EXPECT_EQ(again.height(), 20U);
    EXPECT_EQ(again.tip_id(), tip);
    EXPECT_EQ(again.state().state_hash(), state);
    EXPECT_FALSE(journal.dropped_partial_record());
}

TEST_F(NodePersistence, TruncatedTailIsDropped) {
    auto [tip, state] = run_20_blocks();
    auto file = dir / "chain.jsonl";
    auto size = std::filesystem::file_size(file);
    {
        std::ofstream out(file, std::ios::binary | std::ios::app);
        out << "{\"header\":{\"height\":21,";
    }
    SimNetwork net({1});
    FileJournal journal(dir);
    Node again(options(), net.add_endpoint("a"), journal);
    EXPECT_TRUE(journal.dropped_partial_record());
    EXPECT_EQ(again.tip_id(), tip);
    EXPECT_EQ(again.state().state_hash(), state);
    EXPECT_EQ(std::filesystem::file_size(file), size);
}

TEST_F(NodePersistence, MutatedHistoryIsCorrupt) {
    run_20_blocks();
    auto file = dir / "chain.jsonl";
    std::vector<std::string> lines;
    {
        std::ifstream in(file);
        for (std::string l; std::getline(in, l);) lines.push_back(l);
    }
    ASSERT_EQ(lines.size(), 20U);
    auto pos = lines[4].find("\"timestamp\":");
    ASSERT_NE(pos, std::string::npos);
    auto& ch = lines[4][pos + 12];
    ch = ch == '9' ? '8' : static_cast<char>(ch + 1);
    {
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        for (const auto& l : lines) out << l << '\n';
    }
    SimNetwork net({1});
    FileJournal journal(dir);
    try {
        Node again(options(), net.add_endpoint("a"), journal);
        FAIL() << "expected CorruptStore";
    } catch (const CorruptStore& e) {
        // Either record 5 fails its own checks or, if its work still happens to
        // meet the target, record 6 no longer links to it.
        EXPECT_TRUE(e.line() == 5U || e.line() == 6U) << e.what();
    }
}
