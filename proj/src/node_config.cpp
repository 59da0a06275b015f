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

#include "chainfab/node_config.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#define TOML_HEADER_ONLY 1
#include <toml.hpp>

#include "chainfab/keyfile.hpp"

namespace chainfab {

namespace fs = std::filesystem;

HostPort parse_host_port(std::string_view text) {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
        throw ConfigError("expected host:port, got \"" + std::string(text) + "\"");
    }
    HostPort hp;
    hp.host = std::string(text.substr(0, colon));
    auto digits = text.substr(colon + 1);
    unsigned port = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || port > 65535) {
        throw ConfigError("bad port in \"" + std::string(text) + "\"");
    }
    hp.port = static_cast<std::uint16_t>(port);
    return hp;
}

namespace {

class Section {
  public:
    Section(const toml::table* table, std::string name, std::initializer_list<std::string_view> allowed)
        : table_(table), name_(std::move(name)) {
        if (!table_) return;
        for (const auto& [k, _] : *table_) {
            if (std::find(allowed.begin(), allowed.end(), k.str()) == allowed.end()) {
                throw ConfigError("unknown key " + path(k.str()));
            }
        }
    }

    [[nodiscard]] bool present() const { return table_ != nullptr; }

    template <typename T>
    void read(std::string_view key, T& out) const {
        const toml::node* n = table_ ? table_->get(key) : nullptr;
        if (!n) return;
        if constexpr (std::is_same_v<T, std::string>) {
            auto v = n->value_exact<std::string>();
            if (!v) throw ConfigError(path(key) + " must be a string");
            out = *v;
        } else if constexpr (std::is_same_v<T, bool>) {
            auto v = n->value_exact<bool>();
            if (!v) throw ConfigError(path(key) + " must be true or false");
            out = *v;
        } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
            const auto* arr = n->as_array();
            if (!arr) throw ConfigError(path(key) + " must be an array of strings");
            out.clear();
            for (const auto& item : *arr) {
                auto v = item.value_exact<std::string>();
                if (!v) throw ConfigError(path(key) + " must be an array of strings");
                out.push_back(*v);
            }
        } else {
            auto v = n->value_exact<std::int64_t>();
            if (!v) throw ConfigError(path(key) + " must be an integer");
            if (*v < 0) throw ConfigError(path(key) + " must be >= 0");
            out = static_cast<T>(*v);
        }
    }

    [[nodiscard]] bool has(std::string_view key) const { return table_ && table_->contains(key); }

  private:
    [[nodiscard]] std::string path(std::string_view key) const {
        return name_.empty() ? std::string(key) : name_ + "." + std::string(key);
    }

    const toml::table* table_;
    std::string name_;
};

std::string resolve(const std::string& base, const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base) / p).lexically_normal().string();
}

}  // namespace

NodeConfig NodeConfig::parse_toml(std::string_view text, const std::string& base_dir) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "TOML line " << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
    }
    NodeConfig c;
    Section top(&root, "", {"role", "key_file", "key_seed", "genesis", "data_dir", "p2p", "api", "consensus", "production",
                            "provider"});
    std::string role = "observer";
    top.read("role", role);
    auto parsed = parse_node_role(role);
    if (!parsed) throw ConfigError("role must be provider, customer, validator or observer");
    c.role = *parsed;
    top.read("key_file", c.key_file);
    top.read("key_seed", c.key_seed);
    top.read("genesis", c.genesis_path);
    top.read("data_dir", c.data_dir);
    if (c.genesis_path.empty()) throw ConfigError("genesis is required");

    Section p2p(root["p2p"].as_table(), "p2p", {"listen", "advertise", "bootstrap", "max_peers"});
    p2p.read("listen", c.p2p_listen);
    p2p.read("advertise", c.p2p_advertise);
    p2p.read("bootstrap", c.bootstrap);
    p2p.read("max_peers", c.max_peers);
    (void)parse_host_port(c.p2p_listen);
    for (const auto& b : c.bootstrap) (void)parse_host_port(b);

    Section api(root["api"].as_table(), "api", {"listen", "local_wallet"});
    api.read("listen", c.api_listen);
    api.read("local_wallet", c.local_wallet);
    (void)parse_host_port(c.api_listen);

    Section cons(root["consensus"].as_table(), "consensus", {"mode", "pow_zero_bits", "block_reward", "finality_depth"});
    if (cons.present()) {
        ConsensusConfig cc;
        std::string mode = "pow";
        cons.read("mode", mode);
        if (mode == "pow") {
            cc.mode = ConsensusMode::ProofOfWork;
        } else if (mode == "authority") {
            cc.mode = ConsensusMode::RoundRobinAuthority;
        } else {
            throw ConfigError("consensus.mode must be \"pow\" or \"authority\"");
        }
        cons.read("pow_zero_bits", cc.pow_zero_bits);
        cons.read("block_reward", cc.block_reward);
        cons.read("finality_depth", cc.finality_depth);
        c.consensus = cc;
    }

    Section prod(root["production"].as_table(), "production",
                 {"enabled", "interval_ms", "produce_empty", "max_block_txs", "mempool_capacity"});
    prod.read("enabled", c.produce);
    prod.read("interval_ms", c.production_interval_ms);
    prod.read("produce_empty", c.produce_empty);
    prod.read("max_block_txs", c.max_block_txs);
    prod.read("mempool_capacity", c.mempool_capacity);
    if (c.production_interval_ms <= 0) throw ConfigError("production.interval_ms must be positive");
    if (c.max_block_txs == 0) throw ConfigError("production.max_block_txs must be positive");

    Section prov(root["provider"].as_table(), "provider", {"capabilities", "base_cost", "margin", "lead_time"});
    if (prov.present()) {
        ProviderPolicy p;
        prov.read("capabilities", p.capabilities);
        prov.read("base_cost", p.base_cost);
        prov.read("margin", p.margin);
        prov.read("lead_time", p.lead_time);
        if (p.capabilities.empty()) throw ConfigError("provider.capabilities must not be empty");
        c.policy = p;
    }
    if (c.policy && c.role != NodeRole::Provider) throw ConfigError("[provider] is only valid with role = \"provider\"");

    c.genesis_path = resolve(base_dir, c.genesis_path);
    c.key_file = resolve(base_dir, c.key_file);
    c.data_dir = resolve(base_dir, c.data_dir);
    return c;
}

NodeConfig NodeConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    auto base = fs::path(path).parent_path().string();
    auto c = parse_toml(ss.str(), base.empty() ? "." : base);
    c.apply_environment();
    return c;
}

void NodeConfig::apply_environment() {
    if (const char* dir = std::getenv("CHAINFAB_DATA_DIR"); dir && *dir) data_dir = dir;
}

GenesisConfig NodeConfig::load_genesis() const {
    std::ifstream in(genesis_path);
    if (!in) throw ConfigError("cannot read genesis " + genesis_path);
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError(genesis_path + " is not JSON");
    try {
        return GenesisConfig::from_json(j);
    } catch (const std::exception& e) {
        throw ConfigError(genesis_path + ": " + e.what());
    }
}

KeyPair NodeConfig::load_or_create_key() const {
    try {
        if (!key_seed.empty()) return keypair_from_seed_hex(key_seed);
        std::string path = key_file.empty() ? (fs::path(data_dir) / "node.key").string() : key_file;
        if (fs::exists(path)) return read_keyfile(path);
        auto parent = fs::path(path).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
        KeyPair key = random_keypair();
        write_keyfile(path, key);
        return key;
    } catch (const KeyfileError& e) {
        throw ConfigError(e.what());
    }
}

NodeOptions NodeConfig::to_options(const GenesisConfig& genesis, const KeyPair& key) const {
    if (consensus) {
        const auto& g = genesis.consensus;
        if (consensus->mode != g.mode || consensus->pow_zero_bits != g.pow_zero_bits ||
            consensus->block_reward != g.block_reward || consensus->finality_depth != g.finality_depth) {
            throw ConfigError("[consensus] disagrees with the genesis file");
        }
    }
    NodeOptions o;
    o.role = role;
    o.key = key;
    o.genesis = genesis;
    o.listen = p2p_advertise.empty() ? p2p_listen : p2p_advertise;
    o.bootstrap = bootstrap;
    o.policy = policy;
    o.produce = produce && role != NodeRole::Observer;
    o.produce_empty = produce_empty;
    o.max_block_txs = max_block_txs;
    o.mempool_capacity = mempool_capacity;
    o.max_peers = max_peers;
    o.validate();
    return o;
}

}  // namespace chainfab
