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
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "chainfab/bytes.hpp"

namespace chainfab {

struct DigestTag {};
struct PublicKeyTag {};
struct SignatureTag {};
struct SeedTag {};
struct AddressTag {};

using Digest256 = FixedBytes<32, DigestTag>;
using PublicKey = FixedBytes<32, PublicKeyTag>;
using Signature = FixedBytes<64, SignatureTag>;
using Seed = FixedBytes<32, SeedTag>;

/// Account identity: first 20 bytes of SHA-256(public key). Rendered as
/// "cm1" followed by 40 lowercase hex characters.
struct Address : FixedBytes<20, AddressTag> {
    static constexpr std::string_view prefix = "cm1";

    [[nodiscard]] std::string to_string() const { return std::string(prefix) + hex(); }
    static Address parse(std::string_view text);
};

/// Ed25519 key pair. The seed is the secret; it never appears in any
/// transaction or block encoding.
struct KeyPair {
    Seed seed;
    PublicKey public_key;
};

class SeedLengthError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

Digest256 hash_bytes(ByteView data);
inline Digest256 hash_bytes(std::string_view data) { return hash_bytes(as_bytes(data)); }

KeyPair generate_keypair(ByteView seed);
inline KeyPair generate_keypair(const Seed& seed) { return generate_keypair(seed.view()); }

/// Fresh keypair from the OS random source.
KeyPair random_keypair();

Signature sign(const Seed& secret, ByteView message);
inline Signature sign(const KeyPair& kp, ByteView message) { return sign(kp.seed, message); }
inline Signature sign(const KeyPair& kp, std::string_view message) { return sign(kp.seed, as_bytes(message)); }

// Never throws; anything malformed is simply invalid.
bool verify_signature(const PublicKey& public_key, ByteView message, const Signature& signature) noexcept;
bool verify_signature(ByteView public_key, ByteView message, ByteView signature) noexcept;

Address derive_address(const PublicKey& public_key);

/// Number of leading zero bits of a digest, 0..256.
int leading_zero_bits(const Digest256& digest);

}  // namespace chainfab

template <>
struct std::hash<chainfab::Digest256> {
    std::size_t operator()(const chainfab::Digest256& d) const noexcept {
        std::size_t h = 0;
        for (int i = 0; i < 8; ++i) h = (h << 8) | d.bytes[i];
        return h;
    }
};
