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

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chainfab {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

class HexError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Lowercase, no separators.
std::string to_hex(ByteView data);

// Strict inverse of to_hex: rejects odd length, uppercase and non-hex characters.
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// Fixed-size byte string with a phantom tag so digests, keys and signatures
// cannot be mixed up.
template <std::size_t N, typename Tag>
struct FixedBytes {
    static constexpr std::size_t size = N;
    std::array<std::uint8_t, N> bytes{};

    auto operator<=>(const FixedBytes&) const = default;

    [[nodiscard]] ByteView view() const { return bytes; }
    [[nodiscard]] std::string hex() const { return to_hex(bytes); }
    [[nodiscard]] bool is_zero() const {
        for (auto b : bytes) {
            if (b != 0) return false;
        }
        return true;
    }

    static FixedBytes from_span(ByteView data) {
        if (data.size() != N) {
            throw HexError("expected " + std::to_string(N) + " bytes, got " + std::to_string(data.size()));
        }
        FixedBytes out;
        std::copy(data.begin(), data.end(), out.bytes.begin());
        return out;
    }

    static FixedBytes from_hex(std::string_view hex) {
        if (hex.size() != 2 * N) {
            throw HexError("expected " + std::to_string(2 * N) + " hex characters, got " +
                           std::to_string(hex.size()));
        }
        return from_span(chainfab::from_hex(hex));
    }
};

}  // namespace chainfab
