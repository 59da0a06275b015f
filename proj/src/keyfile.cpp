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

#include "chainfab/keyfile.hpp"

#include <filesystem>
#include <fstream>

namespace chainfab {

Json keyfile_json(const KeyPair& key) {
    return {{"address", derive_address(key.public_key).to_string()},
            {"public", key.public_key.hex()},
            {"seed", key.seed.hex()}};
}

KeyPair keypair_from_seed_hex(std::string_view hex) {
    try {
        return generate_keypair(Seed::from_hex(hex));
    } catch (const std::exception& e) {
        throw KeyfileError(std::string("bad seed: ") + e.what());
    }
}

KeyPair keypair_from_keyfile(const Json& j) {
    if (!j.is_object() || !j.contains("seed") || !j.at("seed").is_string()) {
        throw KeyfileError("keyfile needs a \"seed\" string");
    }
    KeyPair key = keypair_from_seed_hex(j.at("seed").get<std::string>());
    if (j.contains("public") && j.at("public") != key.public_key.hex()) {
        throw KeyfileError("public key does not match seed");
    }
    if (j.contains("address") && j.at("address") != derive_address(key.public_key).to_string()) {
        throw KeyfileError("address does not match seed");
    }
    return key;
}

void write_keyfile(const std::string& path, const KeyPair& key) {
    namespace fs = std::filesystem;
    {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw KeyfileError("cannot write " + path);
        out << keyfile_json(key).dump(2) << '\n';
        if (!out) throw KeyfileError("cannot write " + path);
    }
    fs::permissions(path, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
}

KeyPair read_keyfile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw KeyfileError("cannot read " + path);
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw KeyfileError(path + " is not JSON");
    return keypair_from_keyfile(j);
}

}  // namespace chainfab
