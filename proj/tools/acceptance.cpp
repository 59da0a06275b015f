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

// Acceptance checks. One [PASS]/[FAIL] line per criterion; exit status is
// the number of failures.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "chainfab/block.hpp"
#include "chainfab/chain_store.hpp"
#include "chainfab/journal.hpp"
#include "chainfab/merkle.hpp"
#include "chainfab/node.hpp"
#include "chainfab/sim_harness.hpp"
#include "chainfab/sim_network.hpp"

using namespace chainfab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt_s(double s) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << s << " s";
    return os.str();
}

struct Outcome {
    bool pass;
    std::string detail;
};

KeyPair key_named(const std::string& name) {
    Seed s;
    s.bytes = hash_bytes("acceptance:" + name).bytes;
    return generate_keypair(s);
}

Address addr_named(const std::string& name) { return derive_address(key_named(name).public_key); }

constexpr UnixSeconds kT0 = 1700000000;

GenesisConfig funded_genesis(int pow_bits) {
    GenesisConfig g;
    g.network_id = "chainfab-acceptance";
    g.timestamp = kT0;
    g.consensus.mode = ConsensusMode::ProofOfWork;
    g.consensus.pow_zero_bits = pow_bits;
    for (const char* who : {"customer", "c2", "p1", "p2"}) g.allocations[addr_named(who)] = 1000;
    return g;
}

// 20 mined blocks carrying a little of every transaction kind.
std::vector<Block> build_chain(const GenesisConfig& g) {
    ChainStore store(g);
    Digest256 tip = store.genesis_id();
    std::vector<Block> blocks;
    std::vector<Transaction> queue;
    for (int h = 1; h <= 20; ++h) {
        const auto* parent = store.find(tip);
        UnixSeconds t = kT0 + h * 10;
        std::vector<Transaction> txs;
        if (h % 4 == 1) {
            auto req = make_signed(key_named("customer"),
                                   ServiceRequestPayload{"part-" + std::to_string(h), "cnc-milling", t + 86400, 100});
            txs.push_back(req);
            queue.push_back(make_signed(key_named("p1"), ServiceOfferPayload{req.id(), 80, t + 3600}));
            queue.push_back(make_signed(key_named("p2"), ServiceOfferPayload{req.id(), 60, t + 7200}));
        } else if (h % 4 == 2) {
            txs = queue;
            queue.clear();
        } else if (h % 4 == 3) {
            const auto& prev = blocks[blocks.size() - 2].transactions[1];
            auto best = select_offer(ranked_offers(parent->state->requests.at(prev.id())));
            txs.push_back(make_signed(key_named("customer"), OfferAcceptancePayload{prev.id(), best}));
        } else {
            const auto& req = blocks[blocks.size() - 3].transactions[1];
            txs.push_back(make_signed(key_named("customer"), DeliveryConfirmationPayload{req.id()}));
            txs.push_back(make_signed(key_named("c2"), TransferPayload{addr_named("p1"), 5, std::to_string(h)}));
        }
        auto block = assemble_block(parent->block.header, *parent->state, txs, addr_named("miner"), t, g.consensus);
        auto mined = mine_pow(block, 1U << 24);
        if (!mined) throw std::runtime_error("mining budget exhausted");
        if (store.add_block(*mined).outcome != AddOutcome::Added) throw std::runtime_error("chain build failed");
        tip = mined->id();
        blocks.push_back(*mined);
    }
    return blocks;
}

// Replays journal lines from genesis with full validation; the result must
// also reach the tip the rest of the network holds.
bool revalidates(const GenesisConfig& g, const std::vector<std::string>& lines, const Digest256& anchored_tip) {
    ChainStore store(g);
    for (const auto& line : lines) {
        Block b;
        try {
            b = Block::decode(line);
        } catch (const std::exception&) {
            return false;
        }
        if (store.add_block(b).outcome != AddOutcome::Added) return false;
    }
    return fork_choice(store) == anchored_tip;
}

Outcome tamper_evidence() {
    auto start = Clock::now();
    auto g = funded_genesis(8);
    auto blocks = build_chain(g);
    std::vector<std::string> lines;
    std::size_t total = 0;
    for (const auto& b : blocks) {
        lines.push_back(b.encode());
        total += lines.back().size();
    }
    const Digest256 tip = blocks.back().id();
    if (!revalidates(g, lines, tip)) return {false, "the untouched chain does not revalidate"};

    std::mt19937_64 rng(20260);
    int detected = 0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i) {
        auto mutated = lines;
        std::size_t pos = rng() % total;
        std::size_t li = 0;
        while (pos >= mutated[li].size()) pos -= mutated[li++].size();
        char& c = mutated[li][pos];
        char replacement = c;
        while (replacement == c) replacement = static_cast<char>(rng() & 0xff);
        c = replacement;
        if (!revalidates(g, mutated, tip)) ++detected;
    }
    double secs = seconds_since(start);
    return {detected == trials && secs < 10.0,
            std::to_string(detected) + "/" + std::to_string(trials) + " single-byte mutations of a 20-block chain rejected in " +
                fmt_s(secs)};
}

Outcome case_study(const std::string& path) {
    auto start = Clock::now();
    auto scenario = Scenario::load(path);
    auto report = run_scenario(scenario);
    double secs = seconds_since(start);
    const auto& doc = report.doc;
    const auto& r1 = doc.at("requests").at("r1");
    if (!r1.contains("accepted")) return {false, "no offer was accepted"};
    Amount cheapest = std::numeric_limits<Amount>::max();
    std::vector<Amount> prices;
    for (const auto& o : r1.at("offers")) {
        prices.push_back(o.at("price").get<Amount>());
        cheapest = std::min(cheapest, prices.back());
    }
    std::sort(prices.begin(), prices.end());
    std::string winner = r1.at("accepted").at("provider").get<std::string>();
    Amount customer_before = scenario.nodes.at(*scenario.index_of("customer")).balance;
    Amount winner_before = scenario.nodes.at(*scenario.index_of(winner)).balance;
    Amount price = r1.at("accepted").at("price").get<Amount>();
    Amount customer_after = doc.at("balances").at("customer").get<Amount>();
    Amount winner_after = doc.at("balances").at(winner).get<Amount>();
    bool ok = r1.at("status") == "FULFILLED" && prices == std::vector<Amount>{60, 80, 95} && price == cheapest &&
              customer_before == 100 && customer_after == customer_before - price &&
              winner_after == winner_before + price && doc.at("checks").at("conservation").get<bool>() &&
              report.converged() && secs < 10.0;
    std::ostringstream os;
    os << r1.at("status").get<std::string>() << ", accepted " << price << " = min{80,60,95}, customer " << customer_before
       << "->" << customer_after << ", " << winner << " +" << (winner_after - winner_before)
       << ", conservation at every block " << (doc.at("checks").at("conservation").get<bool>() ? "holds" : "BROKEN")
       << ", " << fmt_s(secs);
    return {ok, os.str()};
}

Scenario pow_five(std::uint64_t seed) {
    Scenario s;
    s.seed = seed;
    s.network_id = "chainfab-acceptance";
    s.consensus.mode = ConsensusMode::ProofOfWork;
    s.consensus.pow_zero_bits = 6;
    s.consensus.finality_depth = 6;
    for (int i = 0; i < 5; ++i) s.nodes.push_back({"n" + std::to_string(i), NodeRole::Validator, 0, std::nullopt, std::nullopt});
    return s;
}

Outcome fault_tolerance() {
    auto start = Clock::now();
    auto s = pow_five(7);
    s.block_interval_s = 2;
    s.duration_s = 20;
    s.settle_s = 10;
    inject_fault(s, FaultKind::Kill, {"n3"}, 8);
    inject_fault(s, FaultKind::Kill, {"n4"}, 8);
    auto report = run_scenario(s);
    double secs = seconds_since(start);
    const auto& doc = report.doc;
    std::uint64_t at_kill = doc.at("faults")[1].at("live_height").get<std::uint64_t>();
    std::uint64_t min_after = std::numeric_limits<std::uint64_t>::max();
    for (const auto& n : {"n0", "n1", "n2"}) min_after = std::min(min_after, doc.at("nodes").at(n).at("height").get<std::uint64_t>());
    bool ok = min_after > at_kill && doc.at("identical_tips").get<bool>() &&
              !doc.at("nodes").at("n3").at("alive").get<bool>() && secs < 10.0 && s.duration_s + s.settle_s <= 30;
    std::ostringstream os;
    os << "killed 2 of 5 at t=8 s (height " << at_kill << "), survivors reach " << min_after << " on "
       << (doc.at("identical_tips").get<bool>() ? "one tip" : "DIFFERENT tips") << ", " << (s.duration_s + s.settle_s)
       << " s virtual, " << fmt_s(secs) << " wall";
    return {ok, os.str()};
}

Outcome convergence() {
    auto start = Clock::now();
    int converged = 0;
    int identical = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto s = pow_five(seed);
        s.block_interval_s = 5;
        s.duration_s = 60;
        s.settle_s = 30;
        auto report = run_scenario(s);
        converged += report.converged() ? 1 : 0;
        identical += report.doc.at("identical_tips").get<bool>() ? 1 : 0;
    }
    return {converged == 20, std::to_string(converged) + "/20 seeds agree below finality depth 6 (" + std::to_string(identical) +
                                 "/20 with identical tips), " + fmt_s(seconds_since(start))};
}

Outcome atomic_exchange() {
    auto start = Clock::now();
    const std::vector<std::string> names = {"customer", "c2", "c3", "p1", "p2", "p3"};
    std::map<Address, Amount> alloc;
    for (const auto& n : names) alloc[addr_named(n)] = 500;
    LedgerState state = LedgerState::from_allocations(alloc);
    std::mt19937_64 rng(8032);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    auto range = [&](std::int64_t lo, std::int64_t hi) { return lo + static_cast<std::int64_t>(rng() % (hi - lo + 1)); };

    std::vector<Digest256> requests;
    std::map<Digest256, std::vector<Digest256>> offers;
    std::vector<Transaction> applied;
    std::map<Digest256, int> acceptances;
    std::map<TxKind, int> ok_by_kind;
    int rejected = 0;
    int negative = 0;
    int double_accept = 0;
    UnixSeconds now = kT0;

    const int n_tx = 10'000;
    for (int i = 0; i < n_tx; ++i) {
        if (i % 10 == 0) {
            now += range(0, 600);
            expire_requests_in_place(state, now);
        }
        const KeyPair& signer = key_named(names[pick(names.size())]);
        // Mostly recent requests, sometimes an old or made-up one.
        auto known_request = [&] {
            if (requests.empty() || pick(20) == 0) return hash_bytes(std::to_string(rng()));
            std::size_t window = std::min<std::size_t>(requests.size(), pick(10) == 0 ? requests.size() : 8);
            return requests[requests.size() - 1 - pick(window)];
        };
        Transaction tx;
        switch (pick(8)) {
            case 0:
                tx = make_signed(key_named(names[pick(3)]),
                                 ServiceRequestPayload{"spec", pick(4) ? "cnc-milling" : "turning", now + range(-100, 20000), range(-5, 300)});
                break;
            case 1: {
                auto rid = known_request();
                auto rec = state.requests.find(rid);
                UnixSeconds due = rec == state.requests.end() ? now : rec->second.payload.due_date;
                tx = make_signed(key_named(names[3 + pick(3)]), ServiceOfferPayload{rid, range(-5, 250), due - range(-50, 5000)});
                break;
            }
            case 2:
            case 3: {
                auto rid = known_request();
                auto& os = offers[rid];
                Digest256 oid = os.empty() || pick(8) == 0 ? hash_bytes(std::to_string(rng())) : os[pick(os.size())];
                auto rec = state.requests.find(rid);
                // The real customer signs most of the time so acceptances actually land.
                KeyPair k = signer;
                if (rec != state.requests.end() && pick(10) < 7) {
                    for (const auto& n : names) {
                        if (addr_named(n) == rec->second.customer) k = key_named(n);
                    }
                }
                tx = make_signed(k, OfferAcceptancePayload{rid, oid});
                break;
            }
            case 4: {
                auto rid = known_request();
                KeyPair k = signer;
                if (auto rec = state.requests.find(rid); rec != state.requests.end() && pick(2)) {
                    for (const auto& n : names) {
                        if (addr_named(n) == rec->second.customer) k = key_named(n);
                    }
                }
                tx = make_signed(k, DeliveryConfirmationPayload{rid});
                break;
            }
            case 5:
                tx = make_signed(signer, TransferPayload{addr_named(names[pick(names.size())]), range(-10, 600), std::to_string(i)});
                break;
            case 6:
                tx = applied.empty() ? make_coinbase(1, addr_named("p1"), 50) : applied[pick(applied.size())];  // replay
                break;
            default: {
                tx = make_signed(signer, TransferPayload{addr_named("p1"), 1, "forged" + std::to_string(i)});
                if (pick(2)) {
                    std::get<TransferPayload>(tx.payload).amount = 2;
                } else {
                    tx = make_coinbase(i, addr_named("p1"), 50);
                }
                        break;
            }
        }
        const LedgerState before = state;
        const bool full_compare = i % 100 == 0;
        const std::string before_bytes = full_compare ? canonical_encode(state.to_json()) : std::string();
        auto rej = try_apply(state, tx, TxContext{now, std::nullopt});
        if (rej) {
            ++rejected;
            if (!(state == before) || (full_compare && canonical_encode(state.to_json()) != before_bytes)) {
                return {false, "rejection " + std::string(to_string(rej->code)) + " changed state at tx " + std::to_string(i)};
            }
            continue;
        }
        ++ok_by_kind[tx.kind()];
        applied.push_back(tx);
        if (const auto* r = tx.as<ServiceRequestPayload>()) {
            (void)r;
            requests.push_back(tx.id());
        } else if (const auto* o = tx.as<ServiceOfferPayload>()) {
            offers[o->request_id].push_back(tx.id());
        } else if (const auto* a = tx.as<OfferAcceptancePayload>()) {
            if (++acceptances[a->request_id] > 1) ++double_accept;
        }
        for (const auto& [_, bal] : state.balances) negative += bal < 0 ? 1 : 0;
        for (const auto& [_, rec] : state.requests) negative += rec.escrow < 0 ? 1 : 0;
        if (!conservation_holds(state)) return {false, "conservation broken at tx " + std::to_string(i)};
    }
    double secs = seconds_since(start);
    std::ostringstream os;
    os << n_tx << " fuzzed transactions: " << (n_tx - rejected) << " applied (" << ok_by_kind[TxKind::ServiceRequest]
       << " requests, " << ok_by_kind[TxKind::ServiceOffer] << " offers, " << ok_by_kind[TxKind::OfferAcceptance]
       << " acceptances, " << ok_by_kind[TxKind::DeliveryConfirmation] << " confirmations, " << ok_by_kind[TxKind::Transfer]
       << " transfers), " << rejected << " rejected with state unchanged; " << negative << " negative balances, "
       << double_accept << " double acceptances, " << fmt_s(secs);
    bool exercised = ok_by_kind[TxKind::OfferAcceptance] >= 50 && ok_by_kind[TxKind::DeliveryConfirmation] >= 20;
    return {negative == 0 && double_accept == 0 && exercised, os.str()};
}

Digest256 concat_hash(const Digest256& a, const Digest256& b) {
    Bytes buf(a.bytes.begin(), a.bytes.end());
    buf.insert(buf.end(), b.bytes.begin(), b.bytes.end());
    return hash_bytes(ByteView(buf));
}

// Independent recursive definition: a subtree of width w over [lo, lo+w)
// where positions past the end reuse the last real node of that level.
Digest256 brute_root(const std::vector<Digest256>& leaves) {
    if (leaves.empty()) return hash_bytes("");
    std::function<Digest256(std::vector<Digest256>)> up = [&](std::vector<Digest256> level) {
        if (level.size() == 1) return level[0];
        std::vector<Digest256> next;
        for (std::size_t i = 0; i < level.size(); i += 2) {
            next.push_back(concat_hash(level[i], level[std::min(i + 1, level.size() - 1)]));
        }
        return up(next);
    };
    return up(leaves);
}

Outcome crypto_known_answers() {
    int failures = 0;
    int checks = 0;
    auto expect = [&](bool ok) {
        ++checks;
        failures += ok ? 0 : 1;
    };
    // FIPS 180-4 example messages.
    expect(hash_bytes("").hex() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    expect(hash_bytes("abc").hex() == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    expect(hash_bytes("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq").hex() ==
           "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    expect(hash_bytes("abcdefghbcdefghicdefghijdefghijkefghijklfghijklmghijklmnhijklmnoijklmnopjklmnopqklmnopqrlmnopqrsmnopqrstnopqrstu")
               .hex() == "cf5b16a778af8380036ce59e7b0492370b249b11e8f07a51afac45037afee9d1");
    expect(hash_bytes(std::string(1'000'000, 'a')).hex() == "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");

    // RFC 8032 section 7.1, TEST 1..3.
    struct V {
        const char *secret, *pub, *msg, *sig;
    };
    const V vectors[] = {
        {"9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60",
         "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a", "",
         "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b"},
        {"4ccd089b28ff96da9db6c346ec114e0f5b8a319f35aba624da8cf6ed4fb8a6fb",
         "3d4017c3e843895a92b70aa74d1b7ebc9c982ccf2ec4968cc0cd55f12af4660c", "72",
         "92a009a9f0d4cab8720e820b5f642540a2b27b5416503f8fb3762223ebdb69da085ac1e43e15996e458f3613d0f11d8c387b2eaeb4302aeeb00d291612bb0c00"},
        {"c5aa8df43f9f837bedb7442f31dcb7b166d38535076f094b85ce3a2e0b4458f7",
         "fc51cd8e6218a1a38da47ed00230f0580816ed13ba3303ac5deb911548908025", "af82",
         "6291d657deec24024827e69c3abe01a30ce548a284743a445e3680d7db5ac3ac18ff9b538d16f290ae67f760984dc6594a7c15e9716ed28dc027beceea1ec40a"},
    };
    for (const auto& v : vectors) {
        auto kp = generate_keypair(Seed::from_hex(v.secret));
        auto msg = from_hex(v.msg);
        auto sig = sign(kp.seed, ByteView(msg));
        expect(kp.public_key.hex() == v.pub);
        expect(sig.hex() == v.sig);
        expect(verify_signature(kp.public_key, ByteView(msg), sig));
        auto tampered = sig;
        tampered.bytes[0] ^= 1;
        expect(!verify_signature(kp.public_key, ByteView(msg), tampered));
    }

    // Merkle: every tree of 0..8 leaves against the brute-force definition,
    // every leaf substitution, every proof.
    int merkle_cases = 0;
    for (int n = 0; n <= 8; ++n) {
        std::vector<Digest256> leaves;
        for (int i = 0; i < n; ++i) leaves.push_back(hash_bytes("leaf-" + std::to_string(i)));
        auto root = merkle_root(leaves);
        expect(root == brute_root(leaves));
        ++merkle_cases;
        for (int i = 0; i < n; ++i) {
            auto changed = leaves;
            changed[i] = hash_bytes("other");
            expect(merkle_root(changed) == brute_root(changed) && merkle_root(changed) != root);
            auto proof = merkle_prove(leaves, i);
            expect(merkle_verify(root, leaves[i], proof));
            expect(!merkle_verify(root, hash_bytes("other"), proof));
            merkle_cases += 3;
        }
    }
    return {failures == 0, std::to_string(checks - failures) + "/" + std::to_string(checks) +
                               " checks: 5 SHA-256 FIPS 180-4 vectors, 3 Ed25519 RFC 8032 vectors, " +
                               std::to_string(merkle_cases) + " Merkle cases over 0..8 leaves"};
}

Outcome persistence_replay() {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / ("chainfab-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    auto g = funded_genesis(6);
    auto opts = [&](const std::string& name) {
        NodeOptions o;
        o.key = key_named(name);
        o.genesis = g;
        o.listen = name;
        o.bootstrap = {name == "a" ? "b" : "a"};
        o.produce_empty = true;
        return o;
    };
    const Millis base = (kT0 + 100) * 1000;
    Digest256 tip, state;
    std::uint64_t height = 0;
    {
        // Node b learns every block over the network from a and journals it.
        SimNetwork net(SimNetConfig{3, 5, 20, 0.0});
        MemoryJournal ja;
        FileJournal jb(dir);
        Node a(opts("a"), net.add_endpoint("a"), ja);
        Node b(opts("b"), net.add_endpoint("b"), jb);
        net.on_delivery("a", [&] { a.poll(base + net.now()); });
        net.on_delivery("b", [&] { b.poll(base + net.now()); });
        a.start(base);
        b.start(base);
        net.run_until_quiescent();
        auto req = make_signed(key_named("customer"), ServiceRequestPayload{"bracket", "cnc-milling", kT0 + 86400, 100});
        for (int i = 0; i < 20; ++i) {
            Millis now = base + net.now();
            if (i == 1) b.submit_transaction(req, now);
            if (i == 3) b.submit_transaction(make_signed(key_named("p1"), ServiceOfferPayload{req.id(), 70, kT0 + 3600}), now);
            if (i == 5) b.submit_transaction(make_signed(key_named("c2"), TransferPayload{addr_named("p2"), 9, "x"}), now);
            net.run_until(net.now() + 200);
            a.try_produce(base + net.now());
            net.run_until(net.now() + 800);
        }
        net.run_until_quiescent();
        if (a.tip_id() != b.tip_id() || b.height() != 20) {
            fs::remove_all(dir);
            return {false, "live run ended at heights " + std::to_string(a.height()) + "/" + std::to_string(b.height())};
        }
        tip = b.tip_id();
        state = b.state().state_hash();
        height = b.height();
    }
    SimNetwork net(SimNetConfig{4});
    FileJournal journal(dir);
    bool same = false;
    std::string detail;
    try {
        Node again(opts("b"), net.add_endpoint("b"), journal);
        same = again.tip_id() == tip && again.state().state_hash() == state && again.height() == height;
        detail = "restart after a " + std::to_string(height) + "-block live run: tip " + again.tip_id().hex().substr(0, 16) +
                 (again.tip_id() == tip ? " (same)" : " (DIFFERENT)") + ", state hash " +
                 again.state().state_hash().hex().substr(0, 16) + (again.state().state_hash() == state ? " (same)" : " (DIFFERENT)");
    } catch (const std::exception& e) {
        detail = std::string("replay failed: ") + e.what();
    }
    fs::remove_all(dir);
    return {same, detail};
}

}  // namespace

int main(int argc, char** argv) {
    std::string scenario = argc > 1 ? argv[1] : "scenarios/case_study.json";
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"tamper evidence", tamper_evidence},
        {"case-study reproduction", [&] { return case_study(scenario); }},
        {"fault tolerance", fault_tolerance},
        {"consensus convergence", convergence},
        {"atomic exchange", atomic_exchange},
        {"crypto known answers", crypto_known_answers},
        {"persistence replay", persistence_replay},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << std::endl;
    }
    return failed;
}
