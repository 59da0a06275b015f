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

#include "chainfab/api_server.hpp"

#include <httplib.h>

#include <charconv>
#include <map>
#include <mutex>
#include <thread>

#include "chainfab/keyfile.hpp"

namespace chainfab {

namespace {

struct Reply {
    int status = 200;
    Json body;
};

Reply fail(int status, std::string code, std::string detail = {}) {
    Json body{{"error", std::move(code)}};
    if (!detail.empty()) body["detail"] = std::move(detail);
    return {status, std::move(body)};
}

template <typename T>
std::optional<T> parse_fixed(std::string_view text) {
    try {
        return T::from_hex(text);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::optional<std::uint64_t> parse_u64(const std::string& text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

bool is_loopback(const std::string& addr) {
    return addr == "127.0.0.1" || addr == "::1" || addr == "::ffff:127.0.0.1" || addr.rfind("127.", 0) == 0;
}

Json block_summary(const ChainEntry& e) {
    return {{"height", e.height()},
            {"id", e.id.hex()},
            {"parent", e.block.header.prev_hash.hex()},
            {"miner", e.block.header.miner.to_string()},
            {"timestamp", e.block.header.timestamp},
            {"tx_ids", [&] {
                 Json ids = Json::array();
                 for (const auto& id : e.block.tx_ids()) ids.push_back(id.hex());
                 return ids;
             }()}};
}

constexpr std::string_view kHexId = "([0-9a-zA-Z]*)";

}  // namespace

Json request_json(const Digest256& id, const RequestRecord& record) {
    Json offers = Json::array();
    for (const auto& c : ranked_offers(record)) {
        offers.push_back({{"offer_id", c.offer_id.hex()},
                          {"provider", c.provider.to_string()},
                          {"quoted_price", c.offer.quoted_price},
                          {"promised_due_date", c.offer.promised_due_date}});
    }
    Json j{{"request_id", id.hex()},
           {"customer", record.customer.to_string()},
           {"product_spec", record.payload.product_spec},
           {"process_tag", record.payload.process_tag},
           {"due_date", record.payload.due_date},
           {"max_price", record.payload.max_price},
           {"status", std::string(to_string(record.status))},
           {"escrow", record.escrow},
           {"offers", offers}};
    if (record.accepted_offer) j["accepted_offer"] = record.accepted_offer->hex();
    return j;
}

struct ApiServer::Impl {
    Impl(NodeRunner& r, ApiOptions o) : runner(r), options(o) {}

    NodeRunner& runner;
    ApiOptions options;
    httplib::Server server;
    std::thread thread;
    std::mutex wallet_mu;
    std::map<Address, KeyPair> wallets;

    void route();
    void reply(httplib::Response& res, const std::function<Reply()>& fn);
    Reply submit(const httplib::Request& req, TxKind kind);
};

void ApiServer::Impl::reply(httplib::Response& res, const std::function<Reply()>& fn) {
    Reply r;
    try {
        r = fn();
    } catch (const RunnerStopped& e) {
        r = fail(503, "NodeStopped", e.what());
    } catch (const std::exception& e) {
        r = fail(500, "InternalError", e.what());
    }
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

Reply ApiServer::Impl::submit(const httplib::Request& req, TxKind kind) {
    Json body = Json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) return fail(400, "MalformedBody", "expected a JSON object");
    Transaction tx;
    if (body.contains("tx")) {
        if (body.size() != 1) return fail(400, "MalformedBody", "a signed submission carries only \"tx\"");
        try {
            tx = Transaction::from_json(body.at("tx"));
        } catch (const std::exception& e) {
            return fail(400, "MalformedTransaction", e.what());
        }
        if (tx.kind() != kind) {
            return fail(400, "WrongKind", "expected " + std::string(to_string(kind)) + ", got " + std::string(to_string(tx.kind())));
        }
    } else if (body.contains("from")) {
        if (!options.local_wallet || !is_loopback(req.remote_addr)) return fail(403, "LocalWalletDisabled");
        if (!body.at("from").is_string() || !body.contains("payload") || body.size() != 2) {
            return fail(400, "MalformedBody", "expected {\"from\": address, \"payload\": {...}}");
        }
        Address from;
        try {
            from = Address::parse(body.at("from").get<std::string>());
        } catch (const std::exception& e) {
            return fail(400, "BadAddress", e.what());
        }
        std::optional<KeyPair> key;
        {
            std::lock_guard lock(wallet_mu);
            if (auto it = wallets.find(from); it != wallets.end()) key = it->second;
        }
        if (!key) return fail(404, "UnknownWallet", from.to_string());
        try {
            tx = make_signed(*key, payload_from_json(kind, body.at("payload")));
        } catch (const std::exception& e) {
            return fail(400, "MalformedPayload", e.what());
        }
    } else {
        return fail(400, "MalformedBody", "expected \"tx\" or \"from\"");
    }
    auto result = runner.call([&](Node& n, Millis now) -> std::optional<SubmitResult> {
        if (n.syncing()) return std::nullopt;
        return n.submit_transaction(tx, now);
    });
    if (!result) return fail(503, "NotSynced", "node is catching up with its peers");
    if (result->accepted) return {200, {{"tx_id", result->tx_id.hex()}, {"status", "pending"}}};
    auto r = fail(result->reason == "MempoolFull" ? 503 : 400, result->reason, result->detail);
    r.body["tx_id"] = result->tx_id.hex();
    return r;
}

void ApiServer::Impl::route() {
    using httplib::Request;
    using httplib::Response;
    auto& s = server;
    const std::string id_re(kHexId);

    s.Get("/status", [this](const Request&, Response& res) {
        reply(res, [&] {
            return runner.call([](Node& n, Millis) -> Reply {
                const auto& cc = n.store().consensus();
                return {200,
                        {{"network_id", n.network_id()},
                         {"role", std::string(to_string(n.options().role))},
                         {"address", n.address().to_string()},
                         {"height", n.height()},
                         {"tip", n.tip_id().hex()},
                         {"genesis_id", n.store().genesis_id().hex()},
                         {"state_hash", n.state().state_hash().hex()},
                         {"mempool", n.mempool().size()},
                         {"peers", n.peers().size()},
                         {"syncing", n.syncing()},
                         {"consensus",
                          {{"mode", std::string(to_string(cc.mode))},
                           {"pow_zero_bits", cc.pow_zero_bits},
                           {"block_reward", cc.block_reward},
                           {"finality_depth", cc.finality_depth}}}}};
            });
        });
    });

    s.Get("/chain", [this](const Request& req, Response& res) {
        reply(res, [&] {
            std::optional<std::uint64_t> from;
            std::optional<std::uint64_t> to;
            if (req.has_param("from") && !(from = parse_u64(req.get_param_value("from")))) return fail(400, "BadRange", "from");
            if (req.has_param("to") && !(to = parse_u64(req.get_param_value("to")))) return fail(400, "BadRange", "to");
            return runner.call([&](Node& n, Millis) -> Reply {
                std::uint64_t hi = std::min(to.value_or(n.height()), n.height());
                std::uint64_t lo = from.value_or(hi >= 19 ? hi - 19 : 0);
                if (lo > hi) return fail(400, "BadRange", "from > to");
                if (hi - lo >= 100) return fail(400, "BadRange", "at most 100 blocks per call");
                Json blocks = Json::array();
                auto chain = n.main_chain();
                for (std::uint64_t h = lo; h <= hi; ++h) blocks.push_back(block_summary(*chain.at(h)));
                return {200, {{"height", n.height()}, {"blocks", blocks}}};
            });
        });
    });

    s.Get("/block/" + id_re, [this](const Request& req, Response& res) {
        reply(res, [&] {
            auto id = parse_fixed<Digest256>(req.matches[1].str());
            if (!id) return fail(400, "BadId", "expected 64 lowercase hex characters");
            return runner.call([&](Node& n, Millis) -> Reply {
                const auto* e = n.store().find(*id);
                if (!e) return fail(404, "UnknownBlock", id->hex());
                const auto* on_main = n.store().ancestor_at(n.tip_id(), e->height());
                return {200,
                        {{"id", e->id.hex()},
                         {"height", e->height()},
                         {"main_chain", on_main && on_main->id == e->id},
                         {"block", e->block.to_json()}}};
            });
        });
    });

    s.Get("/tx/" + id_re, [this](const Request& req, Response& res) {
        reply(res, [&] {
            auto id = parse_fixed<Digest256>(req.matches[1].str());
            if (!id) return fail(400, "BadId", "expected 64 lowercase hex characters");
            return runner.call([&](Node& n, Millis) -> Reply {
                auto loc = n.find_tx(*id);
                if (!loc) return fail(404, "UnknownTransaction", id->hex());
                Json j{{"tx_id", id->hex()}, {"tx", loc->tx.to_json()}};
                if (loc->where == TxLocation::Where::Pending) {
                    j["status"] = "pending";
                } else {
                    j["status"] = "confirmed";
                    j["block_id"] = loc->block_id.hex();
                    j["height"] = loc->height;
                    j["confirmations"] = loc->confirmations;
                }
                return {200, j};
            });
        });
    });

    s.Get("/mempool", [this](const Request&, Response& res) {
        reply(res, [&] {
            return runner.call([](Node& n, Millis) -> Reply {
                Json txs = Json::array();
                for (const auto& tx : n.mempool().entries()) {
                    txs.push_back({{"tx_id", tx.id().hex()}, {"kind", std::string(to_string(tx.kind()))}, {"tx", tx.to_json()}});
                }
                return {200, {{"size", n.mempool().size()}, {"capacity", n.mempool().capacity()}, {"transactions", txs}}};
            });
        });
    });

    s.Get("/peers", [this](const Request&, Response& res) {
        reply(res, [&] {
            return runner.call([](Node& n, Millis) -> Reply {
                Json peers = Json::array();
                for (const auto& [id, p] : n.peers().peers()) {
                    peers.push_back({{"node_id", id.to_string()},
                                     {"endpoint", p.endpoint},
                                     {"listen", p.listen},
                                     {"score", p.score},
                                     {"tip_height", p.tip_height}});
                }
                return {200, {{"count", peers.size()}, {"peers", peers}}};
            });
        });
    });

    s.Get("/balance/" + id_re, [this](const Request& req, Response& res) {
        reply(res, [&] {
            Address addr;
            try {
                addr = Address::parse(req.matches[1].str());
            } catch (const std::exception& e) {
                return fail(400, "BadAddress", e.what());
            }
            return runner.call([&](Node& n, Millis) -> Reply {
                return {200, {{"address", addr.to_string()}, {"balance", n.state().balance(addr)}, {"height", n.height()}}};
            });
        });
    });

    s.Get("/requests", [this](const Request& req, Response& res) {
        reply(res, [&] {
            std::optional<RequestStatus> filter;
            if (req.has_param("status")) {
                filter = parse_request_status(req.get_param_value("status"));
                if (!filter) return fail(400, "BadStatus", "expected OPEN, ACCEPTED, FULFILLED or EXPIRED");
            }
            return runner.call([&](Node& n, Millis) -> Reply {
                Json list = Json::array();
                for (const auto& [id, rec] : n.state().requests) {
                    if (!filter || rec.status == *filter) list.push_back(request_json(id, rec));
                }
                return {200, {{"count", list.size()}, {"requests", list}}};
            });
        });
    });

    s.Get("/requests/" + id_re, [this](const Request& req, Response& res) {
        reply(res, [&] {
            auto id = parse_fixed<Digest256>(req.matches[1].str());
            if (!id) return fail(400, "BadId", "expected 64 lowercase hex characters");
            return runner.call([&](Node& n, Millis) -> Reply {
                auto it = n.state().requests.find(*id);
                if (it == n.state().requests.end()) return fail(404, "UnknownRequest", id->hex());
                return {200, request_json(*id, it->second)};
            });
        });
    });

    s.Post("/wallet", [this](const Request& req, Response& res) {
        reply(res, [&] {
            if (!options.local_wallet || !is_loopback(req.remote_addr)) return fail(403, "LocalWalletDisabled");
            KeyPair key = random_keypair();
            {
                std::lock_guard lock(wallet_mu);
                wallets[derive_address(key.public_key)] = key;
            }
            return Reply{200, keyfile_json(key)};
        });
    });

    const std::pair<const char*, TxKind> writes[] = {
        {"/requests", TxKind::ServiceRequest},        {"/offers", TxKind::ServiceOffer},
        {"/accept", TxKind::OfferAcceptance},         {"/confirm", TxKind::DeliveryConfirmation},
        {"/transfer", TxKind::Transfer},
    };
    for (const auto& [path, kind] : writes) {
        s.Post(path, [this, kind = kind](const Request& req, Response& res) { reply(res, [&] { return submit(req, kind); }); });
    }

    s.set_error_handler([](const Request&, Response& res) {
        if (!res.body.empty()) return;
        res.set_content(Json{{"error", res.status == 404 ? "NotFound" : "HttpError"}}.dump(), "application/json");
    });
}

ApiServer::ApiServer(NodeRunner& runner, ApiOptions options) : impl_(std::make_unique<Impl>(runner, options)) {
    impl_->route();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port) {
    int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound <= 0) throw std::runtime_error("cannot bind API to " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    return bound;
}

void ApiServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace chainfab
