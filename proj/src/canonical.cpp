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

#include "chainfab/canonical.hpp"

namespace chainfab {

namespace {

void reject_floats(const Json& value) {
    switch (value.type()) {
        case Json::value_t::number_float:
            throw UnencodableError("floating-point values have no canonical encoding");
        case Json::value_t::binary:
            throw UnencodableError("binary values have no canonical encoding");
        case Json::value_t::discarded:
            throw UnencodableError("discarded value");
        case Json::value_t::object:
        case Json::value_t::array:
            for (const auto& child : value) reject_floats(child);
            break;
        default:
            break;
    }
}

}  // namespace

std::string canonical_encode(const Json& value) {
    reject_floats(value);
    try {
        return value.dump(-1, ' ', false, Json::error_handler_t::strict);
    } catch (const Json::type_error& e) {
        throw UnencodableError(e.what());
    }
}

Json canonical_decode(std::string_view text) {
    Json value;
    try {
        value = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw DecodeError(std::string("malformed JSON: ") + e.what());
    }
    std::string again;
    try {
        again = canonical_encode(value);
    } catch (const UnencodableError& e) {
        throw DecodeError(e.what());
    }
    if (again != text) throw DecodeError("input is not in canonical form");
    return value;
}

namespace json_field {

const Json& require(const Json& obj, std::string_view key) {
    if (!obj.is_object()) throw DecodeError("expected an object");
    auto it = obj.find(std::string(key));
    if (it == obj.end()) throw DecodeError("missing field \"" + std::string(key) + "\"");
    return *it;
}

void expect_keys(const Json& obj, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) throw DecodeError("expected an object");
    for (auto k : keys) require(obj, k);
    if (obj.size() != keys.size()) throw DecodeError("unexpected extra fields");
}

std::string string(const Json& obj, std::string_view key) {
    const auto& v = require(obj, key);
    if (!v.is_string()) throw DecodeError(std::string(key) + ": expected string");
    return v.get<std::string>();
}

std::int64_t int64(const Json& obj, std::string_view key) {
    const auto& v = require(obj, key);
    if (v.is_number_unsigned()) {
        auto u = v.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(INT64_MAX)) throw DecodeError(std::string(key) + ": out of range");
        return static_cast<std::int64_t>(u);
    }
    if (!v.is_number_integer()) throw DecodeError(std::string(key) + ": expected integer");
    return v.get<std::int64_t>();
}

std::uint64_t uint64(const Json& obj, std::string_view key) {
    const auto& v = require(obj, key);
    if (!v.is_number_unsigned()) throw DecodeError(std::string(key) + ": expected non-negative integer");
    return v.get<std::uint64_t>();
}

Address address(const Json& obj, std::string_view key) {
    try {
        return Address::parse(string(obj, key));
    } catch (const HexError& e) {
        throw DecodeError(std::string(key) + ": " + e.what());
    }
}

}  // namespace json_field

}  // namespace chainfab
