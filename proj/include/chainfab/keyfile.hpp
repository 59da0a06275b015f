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

#include <stdexcept>
#include <string>

#include "chainfab/canonical.hpp"
#include "chainfab/crypto.hpp"

namespace chainfab {

class KeyfileError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// {"address": "cm1...", "public": hex, "seed": hex}
Json keyfile_json(const KeyPair& key);

// Throws KeyfileError when the fields are malformed or disagree with the seed.
KeyPair keypair_from_keyfile(const Json& j);
KeyPair keypair_from_seed_hex(std::string_view hex);

// Written with owner-only permissions.
void write_keyfile(const std::string& path, const KeyPair& key);
KeyPair read_keyfile(const std::string& path);

}  // namespace chainfab
