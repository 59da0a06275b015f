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
#include <string_view>

#include <nlohmann/json.hpp>

#include "chainfab/crypto.hpp"

namespace chainfab {

using Json = nlohmann::json;

// Raised for values outside the canonical domain (floats, invalid UTF-8).
class UnencodableError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Raised when decoding bytes that are not the canonical encoding of anything.
class DecodeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Canonical JSON: keys sorted bytewise, no insignificant whitespace,
/// integers in base 10. Floating-point values are rejected.
std::string canonical_encode(const Json& value);

/// Parses text and requires it to be byte-identical to its own canonical
/// re-encoding.
Json canonical_decode(std::string_view text);

inline Digest256 canonical_hash(const Json& value) { return hash_bytes(canonical_encode(value)); }

// Strict field accessors used by the record decoders.
namespace json_field {

const Json& require(const Json& obj, std::string_view key);
void expect_keys(const Json& obj, std::initializer_list<std::string_view> keys);
std::string string(const Json& obj, std::string_view key);
std::int64_t int64(const Json& obj, std::string_view key);
std::uint64_t uint64(const Json& obj, std::string_view key);

template <typename Fixed>
Fixed fixed(const Json& obj, std::string_view key) {
    try {
        return Fixed::from_hex(string(obj, key));
    } catch (const HexError& e) {
        throw DecodeError(std::string(key) + ": " + e.what());
    }
}

Address address(const Json& obj, std::string_view key);

}  // namespace json_field

}  // namespace chainfab
