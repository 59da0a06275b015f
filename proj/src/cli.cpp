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

#include "chainfab/cli.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "chainfab/keyfile.hpp"
#include "chainfab/node_service.hpp"
#include "chainfab/sim_harness.hpp"

namespace chainfab::cli {

namespace {

std::atomic<bool> g_shutdown{false};

extern "C" void on_signal(int) { g_shutdown = true; }

// Errors that carry their exit code up to dispatch.
struct Failure {
    int code;
    std::string message;
};

[[noreturn]] void usage_error(std::string msg) { throw Failure{kExitUsage, std::move(msg)}; }
[[noreturn]] void io_error(std::string msg) { throw Failure{kExitIo, std::move(msg)}; }

struct Globals {
    std::string node = "http://127.0.0.1:" + std::to_string(kDefaultApiPort);
    std::string key = "chainfab.key";
    bool json = false;
};

// "1700000000" is absolute; "+90", "+30m", "+12h", "+7d" are relative to now.
UnixSeconds parse_time(const std::string& text, UnixSeconds now) {
    if (text.empty()) usage_error("empty time");
    bool relative = text[0] == '+';
    std::string_view body(text);
    if (relative) body.remove_prefix(1);
    std::int64_t unit = 1;
    if (relative && !body.empty()) {
        switch (body.back()) {
            case 's': unit = 1; body.remove_suffix(1); break;
            case 'm': unit = 60; body.remove_suffix(1); break;
            case 'h': unit = 3600; body.remove_suffix(1); break;
            case 'd': unit = 86400; body.remove_suffix(1); break;
            default: break;
        }
    }
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
    if (body.empty() || ec != std::errc{} || ptr != body.data() + body.size() || v < 0) {
        usage_error("bad time \"" + text + "\"; use unix seconds or +N[s|m|h|d]");
    }
    return relative ? now + v * unit : v;
}

Digest256 parse_id(const std::string& text, const std::string& what) {
    try {
        return Digest256::from_hex(text);
    } catch (const std::exception& e) {
        usage_error(what + ": " + e.what());
    }
}

class Api {
  public:
    explicit Api(const std::string& url) : url_(url), client_(url) {
        if (!client_.is_valid()) usage_error("bad node URL " + url);
        client_.set_connection_timeout(std::chrono::seconds(3));
        client_.set_read_timeout(std::chrono::seconds(30));
    }

    Json get(const std::string& path) { return finish(client_.Get(path), path); }
    Json post(const std::string& path, const Json& body) {
        return finish(client_.Post(path, body.dump(), "application/json"), path);
    }

  private:
    Json finish(const httplib::Result& r, const std::string& path) {
        if (!r) io_error("cannot reach node at " + url_ + ": " + httplib::to_string(r.error()));
        Json body = Json::parse(r->body, nullptr, false);
        if (body.is_discarded()) io_error(path + ": node sent non-JSON (HTTP " + std::to_string(r->status) + ")");
        if (r->status >= 200 && r->status < 300) return body;
        std::string msg = path + ": " + body.value("error", std::string("HTTP ") + std::to_string(r->status));
        if (body.contains("detail")) msg += " (" + body.at("detail").get<std::string>() + ")";
        throw Failure{r->status >= 500 ? kExitIo : kExitUsage, msg};
    }

    std::string url_;
    httplib::Client client_;
};

KeyPair load_key(const Globals& g) {
    try {
        return read_keyfile(g.key);
    } catch (const KeyfileError& e) {
        io_error(e.what());
    }
}

void print(std::ostream& out, const Globals& g, const Json& j, const std::string& human) {
    if (g.json) {
        out << canonical_encode(j) << '\n';
    } else {
        out << human << '\n';
    }
}

UnixSeconds now_seconds() {
    using namespace std::chrono;
    return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

void submit(std::ostream& out, const Globals& g, const std::string& path, const TxPayload& payload) {
    auto key = load_key(g);
    auto tx = make_signed(key, payload);
    Api api(g.node);
    auto reply = api.post(path, {{"tx", tx.to_json()}});
    print(out, g, reply, reply.at("tx_id").get<std::string>());
}

int run_node(const std::string& config_path, std::ostream& out, std::ostream& err) {
    NodeConfig config;
    try {
        config = NodeConfig::load(config_path);
    } catch (const ConfigError& e) {
        usage_error(e.what());
    }
    std::unique_ptr<NodeService> service;
    try {
        service = std::make_unique<NodeService>(config, &err);
        service->start();
    } catch (const ConfigError& e) {
        usage_error(e.what());
    } catch (const CorruptStore& e) {
        io_error(std::string("refusing to start: ") + e.what());
    } catch (const std::exception& e) {
        io_error(e.what());
    }
    if (service->dropped_partial_record()) err << "dropped a partial record at the end of the journal" << std::endl;
    g_shutdown = false;
    struct sigaction sa {};
    sa.sa_handler = on_signal;
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);
    while (!g_shutdown) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    service->stop();
    out << "stopped" << std::endl;
    return kExitOk;
}

}  // namespace

void request_shutdown() { g_shutdown = true; }

int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"chainfab: consortium-chain manufacturing marketplace node and tools", "chainfab"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--node", g.node, "Node API base URL")->capture_default_str();
    app.add_option("--key", g.key, "Keyfile used to sign")->capture_default_str();
    app.add_flag("--json", g.json, "Print canonical JSON");

    std::function<int()> action;

    // keygen
    std::string keygen_out;
    std::string keygen_seed;
    bool keygen_force = false;
    auto* keygen = app.add_subcommand("keygen", "Create a keyfile");
    keygen->add_option("--out", keygen_out, "Keyfile path (default: --key)");
    keygen->add_option("--seed", keygen_seed, "Deterministic 32-byte hex seed");
    keygen->add_flag("--force", keygen_force, "Overwrite an existing file");
    keygen->callback([&] {
        action = [&] {
            std::string path = keygen_out.empty() ? g.key : keygen_out;
            if (!keygen_force && std::filesystem::exists(path)) io_error(path + " exists; pass --force to overwrite");
            KeyPair key;
            try {
                key = keygen_seed.empty() ? random_keypair() : keypair_from_seed_hex(keygen_seed);
            } catch (const KeyfileError& e) {
                usage_error(e.what());
            }
            try {
                write_keyfile(path, key);
            } catch (const std::exception& e) {
                io_error(e.what());
            }
            Json info{{"address", derive_address(key.public_key).to_string()}, {"public", key.public_key.hex()}, {"path", path}};
            print(out, g, info, info.at("address").get<std::string>());
            return kExitOk;
        };
    });

    // genesis
    std::string gen_network = "chainfab";
    std::string gen_mode = "pow";
    std::string gen_out;
    std::optional<UnixSeconds> gen_time;
    int gen_bits = 16;
    Amount gen_reward = 50;
    std::uint64_t gen_depth = 6;
    std::vector<std::string> gen_allocs, gen_authorities;
    auto* genesis = app.add_subcommand("genesis", "Write a genesis file");
    genesis->add_option("--network-id", gen_network, "Network identifier")->capture_default_str();
    genesis->add_option("--mode", gen_mode, "pow or authority")->capture_default_str();
    genesis->add_option("--time", gen_time, "Genesis timestamp (default: now)");
    genesis->add_option("--pow-bits", gen_bits, "Leading zero bits per block")->capture_default_str();
    genesis->add_option("--reward", gen_reward, "Block reward")->capture_default_str();
    genesis->add_option("--finality-depth", gen_depth, "Finality depth")->capture_default_str();
    genesis->add_option("--alloc", gen_allocs, "ADDRESS=AMOUNT, repeatable");
    genesis->add_option("--authority", gen_authorities, "Validator address in rotation order, repeatable");
    genesis->add_option("--out", gen_out, "Output path")->required();
    genesis->callback([&] {
        action = [&] {
            GenesisConfig gc;
            gc.network_id = gen_network;
            gc.timestamp = gen_time.value_or(now_seconds());
            if (gen_mode == "pow") {
                gc.consensus.mode = ConsensusMode::ProofOfWork;
            } else if (gen_mode == "authority") {
                gc.consensus.mode = ConsensusMode::RoundRobinAuthority;
            } else {
                usage_error("--mode must be pow or authority");
            }
            gc.consensus.pow_zero_bits = gc.consensus.mode == ConsensusMode::ProofOfWork ? gen_bits : 0;
            gc.consensus.block_reward = gen_reward;
            gc.consensus.finality_depth = gen_depth;
            try {
                for (const auto& a : gen_allocs) {
                    auto eq = a.find('=');
                    if (eq == std::string::npos) usage_error("--alloc expects ADDRESS=AMOUNT");
                    gc.allocations[Address::parse(a.substr(0, eq))] = std::stoll(a.substr(eq + 1));
                }
                for (const auto& a : gen_authorities) gc.consensus.authorities.push_back(Address::parse(a));
                gc.consensus.validate();
                genesis_block(gc);
            } catch (const Failure&) {
                throw;
            } catch (const std::exception& e) {
                usage_error(e.what());
            }
            std::ofstream f(gen_out);
            if (!(f << gc.to_json().dump(2) << '\n')) io_error("cannot write " + gen_out);
            auto id = genesis_block(gc).id().hex();
            print(out, g, {{"genesis_id", id}, {"path", gen_out}}, id);
            return kExitOk;
        };
    });

    // node run
    std::string config_path;
    auto* node = app.add_subcommand("node", "Run a node");
    node->require_subcommand(1);
    auto* node_run = node->add_subcommand("run", "Run until SIGINT or SIGTERM");
    node_run->add_option("--config", config_path, "TOML config")->required();
    node_run->callback([&] { action = [&] { return run_node(config_path, out, err); }; });

    // request submit / show
    auto* request = app.add_subcommand("request", "Service requests");
    request->require_subcommand(1);
    std::string spec, tag, due;
    Amount max_price = 0;
    auto* req_submit = request->add_subcommand("submit", "Post a service request");
    req_submit->add_option("--spec", spec, "Product specification")->required();
    req_submit->add_option("--tag", tag, "Process tag, e.g. cnc-milling")->required();
    req_submit->add_option("--due", due, "Due date: unix seconds or +N[s|m|h|d]")->required();
    req_submit->add_option("--max-price", max_price, "Highest acceptable price")->required();
    req_submit->callback([&] {
        action = [&] {
            submit(out, g, "/requests", ServiceRequestPayload{spec, tag, parse_time(due, now_seconds()), max_price});
            return kExitOk;
        };
    });
    std::string show_id;
    auto* req_show = request->add_subcommand("show", "Show a request and its ranked offers");
    req_show->add_option("id", show_id, "Request id")->required();
    req_show->callback([&] {
        action = [&] {
            auto body = Api(g.node).get("/requests/" + parse_id(show_id, "request id").hex());
            std::string human = body.at("status").get<std::string>() + " escrow " + std::to_string(body.at("escrow").get<Amount>());
            for (const auto& o : body.at("offers")) {
                human += "\n  " + o.at("offer_id").get<std::string>() + " " + o.at("provider").get<std::string>() + " price " +
                         std::to_string(o.at("quoted_price").get<Amount>());
            }
            print(out, g, body, human);
            return kExitOk;
        };
    });

    // offer submit
    std::string offer_request, offer_due;
    Amount offer_price = 0;
    auto* offer = app.add_subcommand("offer", "Service offers");
    offer->require_subcommand(1);
    auto* offer_submit = offer->add_subcommand("submit", "Quote on a request");
    offer_submit->add_option("--request", offer_request, "Request id")->required();
    offer_submit->add_option("--price", offer_price, "Quoted price")->required();
    offer_submit->add_option("--due", offer_due, "Promised due date")->required();
    offer_submit->callback([&] {
        action = [&] {
            submit(out, g, "/offers",
                   ServiceOfferPayload{parse_id(offer_request, "request id"), offer_price, parse_time(offer_due, now_seconds())});
            return kExitOk;
        };
    });

    // accept
    std::string accept_request, accept_offer;
    auto* accept = app.add_subcommand("accept", "Accept an offer (default: the top-ranked one)");
    accept->add_option("--request", accept_request, "Request id")->required();
    accept->add_option("--offer", accept_offer, "Offer id");
    accept->callback([&] {
        action = [&] {
            auto rid = parse_id(accept_request, "request id");
            Digest256 oid;
            if (accept_offer.empty()) {
                auto body = Api(g.node).get("/requests/" + rid.hex());
                if (body.at("offers").empty()) usage_error("request has no offers yet");
                oid = parse_id(body.at("offers")[0].at("offer_id").get<std::string>(), "offer id");
            } else {
                oid = parse_id(accept_offer, "offer id");
            }
            submit(out, g, "/accept", OfferAcceptancePayload{rid, oid});
            return kExitOk;
        };
    });

    // confirm
    std::string confirm_request;
    auto* confirm = app.add_subcommand("confirm", "Confirm delivery and release escrow");
    confirm->add_option("--request", confirm_request, "Request id")->required();
    confirm->callback([&] {
        action = [&] {
            submit(out, g, "/confirm", DeliveryConfirmationPayload{parse_id(confirm_request, "request id")});
            return kExitOk;
        };
    });

    // transfer
    std::string transfer_to, memo;
    Amount amount = 0;
    auto* transfer = app.add_subcommand("transfer", "Move funds");
    transfer->add_option("--to", transfer_to, "Recipient address")->required();
    transfer->add_option("--amount", amount, "Amount")->required();
    transfer->add_option("--memo", memo, "Free text, also makes repeated transfers distinct");
    transfer->callback([&] {
        action = [&] {
            Address to;
            try {
                to = Address::parse(transfer_to);
            } catch (const std::exception& e) {
                usage_error(std::string("--to: ") + e.what());
            }
            submit(out, g, "/transfer", TransferPayload{to, amount, memo});
            return kExitOk;
        };
    });

    // balance
    std::string balance_addr;
    auto* balance = app.add_subcommand("balance", "Account balance (default: the keyfile's address)");
    balance->add_option("address", balance_addr, "Address");
    balance->callback([&] {
        action = [&] {
            std::string addr = balance_addr.empty() ? derive_address(load_key(g).public_key).to_string() : balance_addr;
            auto body = Api(g.node).get("/balance/" + addr);
            print(out, g, body, std::to_string(body.at("balance").get<Amount>()));
            return kExitOk;
        };
    });

    // chain show
    std::optional<std::uint64_t> chain_from, chain_to;
    auto* chain = app.add_subcommand("chain", "Inspect the main chain");
    chain->require_subcommand(1);
    auto* chain_show = chain->add_subcommand("show", "List main-chain blocks");
    chain_show->add_option("--from", chain_from, "First height");
    chain_show->add_option("--to", chain_to, "Last height");
    chain_show->callback([&] {
        action = [&] {
            std::string path = "/chain";
            std::string sep = "?";
            if (chain_from) path += sep + "from=" + std::to_string(*chain_from), sep = "&";
            if (chain_to) path += sep + "to=" + std::to_string(*chain_to);
            auto body = Api(g.node).get(path);
            std::string human;
            for (const auto& b : body.at("blocks")) {
                if (!human.empty()) human += '\n';
                human += std::to_string(b.at("height").get<std::uint64_t>()) + " " + b.at("id").get<std::string>() + " txs " +
                         std::to_string(b.at("tx_ids").size());
                for (const auto& id : b.at("tx_ids")) human += "\n    " + id.get<std::string>();
            }
            print(out, g, body, human);
            return kExitOk;
        };
    });

    // status
    auto* status = app.add_subcommand("status", "Node status");
    status->callback([&] {
        action = [&] {
            auto body = Api(g.node).get("/status");
            print(out, g, body,
                  "height " + std::to_string(body.at("height").get<std::uint64_t>()) + " tip " +
                      body.at("tip").get<std::string>() + " peers " + std::to_string(body.at("peers").get<int>()));
            return kExitOk;
        };
    });

    // simulate
    std::string scenario_path, report_path;
    auto* simulate = app.add_subcommand("simulate", "Run a scenario in the deterministic simulator");
    simulate->add_option("scenario", scenario_path, "Scenario JSON")->required();
    simulate->add_option("--out", report_path, "Write the report here instead of stdout");
    simulate->callback([&] {
        action = [&] {
            Scenario sc;
            try {
                sc = Scenario::load(scenario_path);
            } catch (const ScenarioInvalid& e) {
                for (const auto& m : e.errors()) err << m << '\n';
                usage_error("invalid scenario " + scenario_path);
            } catch (const std::exception& e) {
                io_error(e.what());
            }
            auto report = run_scenario(sc);
            std::string text = report.encode();
            if (report_path.empty()) {
                out << text << '\n';
            } else {
                std::ofstream f(report_path);
                if (!(f << text << '\n')) io_error("cannot write " + report_path);
            }
            auto violations = report.violations();
            for (const auto& v : violations) err << "violation: " << v << '\n';
            return violations.empty() ? kExitOk : kExitUsage;
        };
    });

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }
    try {
        return action ? action() : kExitUsage;
    } catch (const Failure& f) {
        err << "error: " << f.message << '\n';
        return f.code;
    }
}

}  // namespace chainfab::cli
