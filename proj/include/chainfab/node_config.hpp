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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chainfab/node.hpp"

namespace chainfab {

constexpr std::uint16_t kDefaultP2pPort = 7771;
constexpr std::uint16_t kDefaultApiPort = 7772;

struct HostPort {
    std::string host;
    std::uint16_t port = 0;
    [[nodiscard]] std::string to_string() const { return host + ":" + std::to_string(port); }
};

// "host:port"; throws ConfigError.
HostPort parse_host_port(std::string_view text);

/// Operator configuration for one node process, read from TOML.
struct NodeConfig {
    NodeRole role = NodeRole::Observer;
    std::string key_file;  // created on first start when missing
    std::string key_seed;  // hex; takes precedence over key_file
    std::string genesis_path;
    std::string data_dir = "chainfab-data";

    std::string p2p_listen = "0.0.0.0:" + std::to_string(kDefaultP2pPort);
    std::string p2p_advertise;  // defaults to p2p_listen
    std::vector<std::string> bootstrap;
    std::size_t max_peers = kDefaultMaxPeers;

    std::string api_listen = "127.0.0.1:" + std::to_string(kDefaultApiPort);
    bool local_wallet = true;

    std::optional<ConsensusConfig> consensus;  // must agree with the genesis file

    bool produce = true;
    Millis production_interval_ms = 10'000;
    bool produce_empty = false;
    std::size_t max_block_txs = 100;
    std::size_t mempool_capacity = kDefaultMempoolCapacity;

    std::optional<ProviderPolicy> policy;

    // Relative paths are resolved against base_dir. Throws ConfigError.
    static NodeConfig parse_toml(std::string_view text, const std::string& base_dir = ".");
    // Reads path and applies CHAINFAB_DATA_DIR.
    static NodeConfig load(const std::string& path);
    void apply_environment();

    [[nodiscard]] std::string journal_dir() const { return data_dir; }
    [[nodiscard]] GenesisConfig load_genesis() const;
    // Seed, else key_file, else data_dir/node.key; a missing file is generated.
    [[nodiscard]] KeyPair load_or_create_key() const;
    [[nodiscard]] NodeOptions to_options(const GenesisConfig& genesis, const KeyPair& key) const;
};

}  // namespace chainfab
